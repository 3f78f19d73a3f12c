#include "bandit/datastore.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "bandit/format.hpp"

namespace bandit {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

struct Entry {
    std::string value;
    int line = 0;
};

struct Section {
    std::string name;
    int line = 0;
    std::map<std::string, Entry> entries;
};

class Parser {
public:
    explicit Parser(std::string_view source) : source_(source) {}

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ManifestError(source_ + ":" + std::to_string(line) + ": " + msg);
    }

    std::vector<Section> sections(std::string_view text) const {
        std::vector<Section> out;
        int line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto nl = text.find('\n', pos);
            std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
            ++line_no;
            if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
            const auto line = trim(raw);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') fail(line_no, "malformed section header '" + std::string(line) + "'");
                std::string name(trim(line.substr(1, line.size() - 2)));
                if (name != "experiment" && name != "scenario" && name != "algorithm")
                    fail(line_no, "unknown section [" + name + "] (valid: experiment, scenario, algorithm)");
                if (name == "experiment") {
                    for (const auto& s : out)
                        if (s.name == "experiment") fail(line_no, "duplicate [experiment] section");
                }
                out.push_back({name, line_no, {}});
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) fail(line_no, "expected 'key = value', got '" + std::string(line) + "'");
            if (out.empty()) fail(line_no, "key outside of any section");
            std::string key(trim(line.substr(0, eq)));
            std::string value(trim(line.substr(eq + 1)));
            if (key.empty()) fail(line_no, "empty key");
            if (value.empty()) fail(line_no, "empty value for '" + key + "'");
            auto& entries = out.back().entries;
            if (entries.count(key)) fail(line_no, "duplicate key '" + key + "'");
            entries[key] = {value, line_no};
        }
        return out;
    }

    template <class F>
    auto convert(const Entry& e, const std::string& key, F&& f) const {
        try {
            return f(e.value);
        } catch (const std::invalid_argument& ex) {
            fail(e.line, ex.what());
        }
        (void)key;
    }

    std::string source_;
};

bool parse_bool(std::string_view s, std::string_view what) {
    if (s == "1" || s == "true") return true;
    if (s == "0" || s == "false") return false;
    throw std::invalid_argument(std::string(what) + ": '" + std::string(s) + "' is not a boolean (0/1/true/false)");
}

/// Keys an algorithm block may carry besides `name`, in canonical order.
std::vector<std::string> algorithm_keys(Algorithm a) {
    switch (a) {
        case Algorithm::Etc: return {"m"};
        case Algorithm::EpsilonGreedy: return {"epsilon"};
        case Algorithm::Ucb:
        case Algorithm::UcbTuned: return {};
        case Algorithm::UcbV: return {"theta", "c", "b"};
        case Algorithm::Eucbv: return {"rho", "psi"};
        case Algorithm::PacUcb: return {"c", "b", "q", "beta", "variance_free"};
        case Algorithm::UcbImproved: return {"delta"};
    }
    return {};
}

void assign_param(PolicyParams& p, const std::string& key, std::string_view value) {
    if (key == "m") p.m = parse_u64(value, "m");
    else if (key == "epsilon") p.epsilon = parse_double(value, "epsilon");
    else if (key == "theta") p.theta = parse_double(value, "theta");
    else if (key == "c") p.c = parse_double(value, "c");
    else if (key == "b") p.b = parse_double(value, "b");
    else if (key == "rho") p.rho = parse_double(value, "rho");
    else if (key == "psi") p.psi = parse_double(value, "psi");
    else if (key == "q") p.q = parse_double(value, "q");
    else if (key == "beta") p.beta = parse_double(value, "beta");
    else if (key == "delta") p.delta_tilde0 = parse_double(value, "delta");
    else if (key == "variance_free") p.variance_free = parse_bool(value, "variance_free");
    else throw std::invalid_argument("unknown parameter '" + key + "'");
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string param_value(const PolicyParams& p, const std::string& key) {
    if (key == "m") return std::to_string(p.m);
    if (key == "epsilon") return shortest(p.epsilon);
    if (key == "theta") return shortest(p.theta);
    if (key == "c") return shortest(p.c);
    if (key == "b") return shortest(p.b);
    if (key == "rho") return shortest(p.rho);
    if (key == "psi") return p.psi ? shortest(*p.psi) : "";
    if (key == "q") return shortest(p.q);
    if (key == "beta") return shortest(p.beta);
    if (key == "delta") return shortest(p.delta_tilde0);
    if (key == "variance_free") return p.variance_free ? "1" : "";
    return "";
}

std::string_view mode_name(PermutationMode m) { return m == PermutationMode::Split ? "split" : "duplicate"; }

PermutationMode parse_mode(std::string_view s) {
    if (s == "split") return PermutationMode::Split;
    if (s == "duplicate") return PermutationMode::Duplicate;
    throw std::invalid_argument("permutation_mode: '" + std::string(s) + "' (valid: split, duplicate)");
}

std::ofstream open_for_write(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw DatastoreError(path.parent_path().string() + ": cannot create directory: " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DatastoreError(path.string() + ": cannot open for writing");
    return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path, std::string_view expected_header) {
    const std::string text = read_text_file(path);
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != expected_header)
        throw DatastoreError(path.string() + ": unexpected header (want '" + std::string(expected_header) + "')");
    int line_no = 1;
    const auto columns = split(expected_header, ',').size();
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (fields.size() != columns)
            throw DatastoreError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                 std::to_string(columns) + " fields");
        rows.push_back(std::move(fields));
    }
    return rows;
}

constexpr std::string_view kRawHeader =
    "algorithm,params,scenario,permutation,run_id,seed,t,cum_reward,cum_regret,subopt_pulls,zeros,ones";
constexpr std::string_view kAggHeader = "algorithm,params,scenario,t,cum_reward,cum_regret,subopt_pulls,zeros,ones";
constexpr std::string_view kSummaryHeader =
    "algorithm,algorithm_id,params,scenario,horizon,runs,avg_regret,regret_se,reward_variance,subopt_ratio,p_value";

}  // namespace

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatastoreError(path.string() + ": cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, std::string_view text) {
    auto out = open_for_write(path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.close();
    if (!out) throw DatastoreError(path.string() + ": write failed");
}

// Manifest

ExperimentManifest parse_manifest(std::string_view text, std::string_view source) {
    Parser parser(source);
    ExperimentManifest m;
    m.scenarios.clear();
    m.algorithms.clear();

    for (const auto& sec : parser.sections(text)) {
        auto reject_unknown = [&](const std::vector<std::string>& allowed) {
            for (const auto& [key, e] : sec.entries) {
                if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                    parser.fail(e.line, "unknown key '" + key + "' in [" + sec.name + "] (valid: " + join(allowed, ", ") + ")");
            }
        };
        auto get = [&](const std::string& key) -> const Entry* {
            auto it = sec.entries.find(key);
            return it == sec.entries.end() ? nullptr : &it->second;
        };

        if (sec.name == "experiment") {
            reject_unknown({"horizon", "runs", "base_seed", "checkpoints", "alpha_levels", "output_dir", "permutation_mode"});
            if (auto e = get("horizon")) m.horizon = parser.convert(*e, "horizon", [](auto& v) { return parse_u64(v, "horizon"); });
            if (auto e = get("runs")) m.runs = parser.convert(*e, "runs", [](auto& v) { return parse_u64(v, "runs"); });
            if (auto e = get("base_seed"))
                m.base_seed = parser.convert(*e, "base_seed", [](auto& v) { return parse_u64(v, "base_seed"); });
            if (auto e = get("checkpoints"); e && e->value != "default") {
                m.checkpoints = parser.convert(*e, "checkpoints", [](auto& v) {
                    std::vector<std::uint64_t> out;
                    for (const auto& item : split(v, ',')) out.push_back(parse_u64(item, "checkpoints"));
                    return out;
                });
            }
            if (auto e = get("alpha_levels")) {
                m.alpha_levels = parser.convert(*e, "alpha_levels", [](auto& v) {
                    std::vector<double> out;
                    for (const auto& item : split(v, ',')) out.push_back(parse_double(item, "alpha_levels"));
                    return out;
                });
            }
            if (auto e = get("output_dir")) m.output_dir = e->value;
            if (auto e = get("permutation_mode"))
                m.permutation_mode = parser.convert(*e, "permutation_mode", [](auto& v) { return parse_mode(v); });
        } else if (sec.name == "scenario") {
            reject_unknown({"preset", "label", "arm_probs"});
            ScenarioSpec s;
            if (auto e = get("preset")) {
                if (get("arm_probs")) parser.fail(e->line, "[scenario] takes either preset or arm_probs, not both");
                s = parser.convert(*e, "preset", [](auto& v) {
                    try {
                        return make_scenario(v);
                    } catch (const ScenarioError& ex) {
                        throw std::invalid_argument(ex.what());
                    }
                });
                if (auto l = get("label")) s.label = l->value;
            } else {
                const Entry* probs = get("arm_probs");
                const Entry* label = get("label");
                if (!probs || !label) parser.fail(sec.line, "[scenario] needs preset, or label and arm_probs");
                s.label = label->value;
                s.arm_probs = parser.convert(*probs, "arm_probs", [](auto& v) {
                    std::vector<double> out;
                    for (const auto& item : split(v, ',')) out.push_back(parse_double(item, "arm_probs"));
                    return out;
                });
            }
            m.scenarios.push_back(std::move(s));
        } else {
            const Entry* name = get("name");
            if (!name) parser.fail(sec.line, "[algorithm] needs a name");
            const Algorithm alg = parser.convert(*name, "name", [](auto& v) {
                try {
                    return parse_algorithm(v);
                } catch (const PolicyError& ex) {
                    throw std::invalid_argument(ex.what());
                }
            });
            auto allowed = algorithm_keys(alg);
            allowed.insert(allowed.begin(), "name");
            reject_unknown(allowed);

            std::vector<PolicyParams> cells{PolicyParams{}};
            cells.front().algorithm = alg;
            for (const auto& key : algorithm_keys(alg)) {
                const Entry* e = get(key);
                if (!e) continue;
                std::vector<PolicyParams> next;
                for (const auto& base : cells) {
                    for (const auto& item : split(e->value, ',')) {
                        PolicyParams p = base;
                        parser.convert(*e, key, [&](auto&) {
                            assign_param(p, key, item);
                            return 0;
                        });
                        next.push_back(p);
                    }
                }
                cells = std::move(next);
            }
            m.algorithms.insert(m.algorithms.end(), cells.begin(), cells.end());
        }
    }

    try {
        validate(m);
    } catch (const ManifestError& ex) {
        throw ManifestError(std::string(source) + ": " + ex.what());
    }
    return m;
}

ExperimentManifest read_manifest(const fs::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const DatastoreError& ex) {
        throw ManifestError(ex.what());
    }
    return parse_manifest(text, path.string());
}

void validate(const ExperimentManifest& m) {
    if (m.scenarios.empty()) throw ManifestError("field 'scenario': at least one [scenario] is required");
    if (m.algorithms.empty()) throw ManifestError("field 'algorithm': at least one [algorithm] is required");
    for (std::size_t i = 0; i < m.scenarios.size(); ++i) {
        try {
            validate(m.scenarios[i]);
        } catch (const ScenarioError& ex) {
            throw ManifestError("field 'scenario[" + std::to_string(i) + "]': " + ex.what());
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (m.scenarios[j].label == m.scenarios[i].label)
                throw ManifestError("field 'scenario[" + std::to_string(i) + "].label': duplicate label '" +
                                    m.scenarios[i].label + "'");
        }
        if (m.horizon <= m.scenarios[i].arms())
            throw ManifestError("field 'horizon': must exceed the number of arms of scenario '" + m.scenarios[i].label + "'");
        if (m.permutation_mode == PermutationMode::Split) {
            const auto orderings = all_permutations(m.scenarios[i].arms()).size();
            if (m.runs % orderings != 0) {
                throw ManifestError("field 'runs': " + std::to_string(m.runs) + " is not divisible by the " +
                                    std::to_string(orderings) + " arm orderings of scenario '" + m.scenarios[i].label + "'");
            }
        }
    }
    for (std::size_t i = 0; i < m.algorithms.size(); ++i) {
        try {
            validate(m.algorithms[i]);
        } catch (const PolicyError& ex) {
            throw ManifestError("field 'algorithm[" + std::to_string(i) + "]': " + ex.what());
        }
    }
    if (m.runs == 0) throw ManifestError("field 'runs': must be >= 1");
    for (std::size_t i = 0; i < m.checkpoints.size(); ++i) {
        if (m.checkpoints[i] == 0 || (i > 0 && m.checkpoints[i] <= m.checkpoints[i - 1]))
            throw ManifestError("field 'checkpoints': must be positive and strictly increasing");
    }
    if (!m.checkpoints.empty() && m.checkpoints.back() != m.horizon)
        throw ManifestError("field 'checkpoints': the last checkpoint must equal the horizon");
    if (m.alpha_levels.empty()) throw ManifestError("field 'alpha_levels': must not be empty");
    for (double a : m.alpha_levels)
        if (!(a > 0.0 && a < 1.0)) throw ManifestError("field 'alpha_levels': " + shortest(a) + " is outside (0,1)");
    if (m.output_dir.empty()) throw ManifestError("field 'output_dir': must not be empty");
}

std::string serialize_manifest(const ExperimentManifest& m) {
    std::ostringstream out;
    out << "[experiment]\n";
    out << "horizon = " << m.horizon << "\n";
    out << "runs = " << m.runs << "\n";
    out << "base_seed = " << m.base_seed << "\n";
    if (m.checkpoints.empty()) {
        out << "checkpoints = default\n";
    } else {
        std::vector<std::string> cps;
        for (auto c : m.checkpoints) cps.push_back(std::to_string(c));
        out << "checkpoints = " << join(cps, ", ") << "\n";
    }
    std::vector<std::string> alphas;
    for (double a : m.alpha_levels) alphas.push_back(shortest(a));
    out << "alpha_levels = " << join(alphas, ", ") << "\n";
    out << "output_dir = " << m.output_dir << "\n";
    out << "permutation_mode = " << mode_name(m.permutation_mode) << "\n";
    for (const auto& s : m.scenarios) {
        std::vector<std::string> probs;
        for (double p : s.arm_probs) probs.push_back(shortest(p));
        out << "\n[scenario]\nlabel = " << s.label << "\narm_probs = " << join(probs, ", ") << "\n";
    }
    for (const auto& p : m.algorithms) {
        out << "\n[algorithm]\nname = " << algorithm_id(p.algorithm) << "\n";
        for (const auto& key : algorithm_keys(p.algorithm)) {
            const auto v = param_value(p, key);
            if (!v.empty()) out << key << " = " << v << "\n";
        }
    }
    return out.str();
}

void write_manifest(const ExperimentManifest& m, const fs::path& path) { write_text_file(path, serialize_manifest(m)); }

ExperimentManifest paper_grid_manifest() {
    ExperimentManifest m;
    m.scenarios = {make_scenario("A"), make_scenario("B"), make_scenario("C")};
    m.horizon = 1'000'000;
    m.runs = 100;
    m.base_seed = 2025;
    auto add = [&](Algorithm a, auto&& setter) {
        PolicyParams p;
        p.algorithm = a;
        setter(p);
        m.algorithms.push_back(p);
    };
    for (std::uint64_t v : {10, 100, 1000, 10'000, 100'000}) add(Algorithm::Etc, [&](auto& p) { p.m = v; });
    for (double e : {0.5, 0.1, 0.05, 0.01, 0.005}) add(Algorithm::EpsilonGreedy, [&](auto& p) { p.epsilon = e; });
    auto none = [](auto&) {};
    add(Algorithm::Ucb, none);
    add(Algorithm::UcbTuned, none);
    add(Algorithm::UcbV, none);
    add(Algorithm::Eucbv, none);
    add(Algorithm::PacUcb, none);
    add(Algorithm::UcbImproved, none);
    return m;
}

ExperimentManifest load_manifest(const std::string& name_or_path) {
    if (name_or_path == "paper_grid") return paper_grid_manifest();
    return read_manifest(name_or_path);
}

std::vector<RunConfig> run_configs(const ExperimentManifest& m) {
    validate(m);
    std::vector<RunConfig> out;
    for (const auto& s : m.scenarios) {
        for (const auto& p : m.algorithms) {
            RunConfig c = make_run_config(s, p, m.horizon, m.runs, m.base_seed);
            if (!m.checkpoints.empty()) c.checkpoints = m.checkpoints;
            c.mode = m.permutation_mode;
            out.push_back(std::move(c));
        }
    }
    return out;
}

void set_horizon(ExperimentManifest& m, std::uint64_t horizon) {
    m.horizon = horizon;
    if (m.checkpoints.empty()) return;
    std::erase_if(m.checkpoints, [&](std::uint64_t c) { return c >= horizon; });
    m.checkpoints.push_back(horizon);
}

PolicyParams params_from_canonical(Algorithm algorithm, std::string_view canonical) {
    PolicyParams p;
    p.algorithm = algorithm;
    if (trim(canonical).empty()) return p;
    const auto allowed = algorithm_keys(algorithm);
    for (const auto& kv : split(canonical, ';')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw DatastoreError("malformed parameter '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw DatastoreError("parameter '" + key + "' does not apply to " + std::string(algorithm_id(algorithm)));
        try {
            assign_param(p, key, kv.substr(eq + 1));
        } catch (const std::invalid_argument& ex) {
            throw DatastoreError(ex.what());
        }
    }
    return p;
}

std::string cell_slug(const ScenarioSpec& scenario, const PolicyParams& params) {
    std::string slug = scenario.label + "__" + std::string(algorithm_id(params.algorithm));
    std::string p = params.canonical();
    if (!p.empty()) {
        std::replace(p.begin(), p.end(), '=', '-');
        std::replace(p.begin(), p.end(), ';', '_');
        slug += "__" + p;
    }
    return slug;
}

// CSV

void write_raw_csv(const RunBatchResult& batch, const fs::path& path) {
    const auto& cfg = batch.config;
    const std::string prefix = std::string(algorithm_id(cfg.params.algorithm)) + "," + cfg.params.canonical() + "," +
                               cfg.scenario.label + ",";
    std::string text(kRawHeader);
    text += '\n';
    for (const auto& run : batch.runs) {
        for (const auto& r : run.records) {
            text += prefix;
            text += std::to_string(run.permutation) + "," + std::to_string(run.run_id) + "," + std::to_string(run.seed) + ",";
            text += std::to_string(r.t) + "," + std::to_string(r.cum_reward) + "," + fixed2(r.cum_regret) + "," +
                    std::to_string(r.subopt_pulls) + "," + std::to_string(r.zeros) + "," + std::to_string(r.ones) + "\n";
        }
    }
    write_text_file(path, text);
}

void write_aggregate_csv(const RunBatchResult& batch, const fs::path& path) {
    const auto& cfg = batch.config;
    const auto mean = batch.mean.empty() ? aggregate(batch.runs) : batch.mean;
    const std::string prefix = std::string(algorithm_id(cfg.params.algorithm)) + "," + cfg.params.canonical() + "," +
                               cfg.scenario.label + ",";
    std::string text(kAggHeader);
    text += '\n';
    for (const auto& m : mean) {
        text += prefix + std::to_string(m.t) + "," + fixed2(m.cum_reward) + "," + fixed2(m.cum_regret) + "," +
                fixed2(m.subopt_pulls) + "," + fixed2(m.zeros) + "," + fixed2(m.ones) + "\n";
    }
    write_text_file(path, text);
}

void write_cell_meta(const RunBatchResult& batch, const fs::path& path) {
    const auto& cfg = batch.config;
    json j;
    j["algorithm"] = algorithm_id(cfg.params.algorithm);
    j["display_name"] = cfg.params.display_name();
    j["params"] = cfg.params.canonical();
    j["scenario"] = {{"label", cfg.scenario.label}, {"arm_probs", cfg.scenario.arm_probs}};
    j["horizon"] = cfg.horizon;
    j["runs"] = cfg.runs;
    j["base_seed"] = cfg.base_seed;
    j["checkpoints"] = cfg.checkpoints;
    j["permutations"] = cfg.permutations;
    j["permutation_mode"] = mode_name(cfg.mode);
    write_text_file(path, j.dump(2) + "\n");
}

std::string write_cell(const RunBatchResult& batch, const fs::path& dir) {
    const std::string slug = cell_slug(batch.config);
    write_raw_csv(batch, dir / (slug + ".raw.csv"));
    write_aggregate_csv(batch, dir / (slug + ".agg.csv"));
    write_cell_meta(batch, dir / (slug + ".meta.json"));
    return slug;
}

RunBatchResult load_cell(const fs::path& dir, std::string_view slug) {
    const fs::path meta_path = dir / (std::string(slug) + ".meta.json");
    const fs::path raw_path = dir / (std::string(slug) + ".raw.csv");
    RunBatchResult batch;
    auto& cfg = batch.config;
    try {
        const json j = json::parse(read_text_file(meta_path));
        cfg.params = params_from_canonical(parse_algorithm(j.at("algorithm").get<std::string>()),
                                           j.at("params").get<std::string>());
        cfg.scenario.label = j.at("scenario").at("label").get<std::string>();
        cfg.scenario.arm_probs = j.at("scenario").at("arm_probs").get<std::vector<double>>();
        cfg.horizon = j.at("horizon").get<std::uint64_t>();
        cfg.runs = j.at("runs").get<std::uint64_t>();
        cfg.base_seed = j.at("base_seed").get<std::uint64_t>();
        cfg.checkpoints = j.at("checkpoints").get<std::vector<std::uint64_t>>();
        cfg.permutations = j.at("permutations").get<std::vector<std::vector<std::size_t>>>();
        cfg.mode = parse_mode(j.at("permutation_mode").get<std::string>());
    } catch (const json::exception& ex) {
        throw DatastoreError(meta_path.string() + ": " + ex.what());
    } catch (const std::invalid_argument& ex) {
        throw DatastoreError(meta_path.string() + ": " + ex.what());
    }

    for (const auto& f : read_csv(raw_path, kRawHeader)) {
        try {
            const auto perm = static_cast<std::size_t>(parse_u64(f[3], "permutation"));
            const auto run_id = parse_u64(f[4], "run_id");
            if (batch.runs.empty() || batch.runs.back().run_id != run_id || batch.runs.back().permutation != perm) {
                batch.runs.push_back({perm, run_id, parse_u64(f[5], "seed"), {}});
            }
            CheckpointRecord r;
            r.t = parse_u64(f[6], "t");
            r.cum_reward = parse_u64(f[7], "cum_reward");
            r.cum_regret = parse_double(f[8], "cum_regret");
            r.subopt_pulls = parse_u64(f[9], "subopt_pulls");
            r.zeros = parse_u64(f[10], "zeros");
            r.ones = parse_u64(f[11], "ones");
            batch.runs.back().records.push_back(r);
        } catch (const std::invalid_argument& ex) {
            throw DatastoreError(raw_path.string() + ": " + ex.what());
        }
    }
    if (batch.runs.empty()) throw DatastoreError(raw_path.string() + ": no runs");
    batch.mean = aggregate(batch.runs);
    return batch;
}

std::vector<std::string> list_cells(const fs::path& root) {
    std::vector<std::string> out;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) return out;
    constexpr std::string_view suffix = ".meta.json";
    for (auto it = fs::recursive_directory_iterator(root, ec); !ec && it != fs::recursive_directory_iterator();
         it.increment(ec)) {
        if (!it->is_regular_file()) continue;
        const std::string name = it->path().filename().string();
        if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0)
            continue;
        const fs::path rel = fs::relative(it->path().parent_path(), root) / name.substr(0, name.size() - suffix.size());
        out.push_back(rel.lexically_normal().generic_string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

fs::path summary_path(const fs::path& dir, std::string_view scenario) {
    return dir / ("summary_" + std::string(scenario) + ".csv");
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const fs::path& path) {
    std::string text(kSummaryHeader);
    text += '\n';
    for (const auto& r : rows) {
        text += r.algorithm + "," + r.algorithm_id + "," + r.params + "," + r.scenario + "," + std::to_string(r.horizon) +
                "," + std::to_string(r.runs) + "," + fixed2(r.avg_regret) + "," + fixed2(r.regret_se) + "," +
                fixed2(r.reward_variance) + "," + fixed(r.subopt_ratio, 5) + "," + fixed2(r.p_value) + "\n";
    }
    write_text_file(path, text);
}

std::vector<SummaryRow> read_summary_csv(const fs::path& path) {
    std::vector<SummaryRow> rows;
    for (const auto& f : read_csv(path, kSummaryHeader)) {
        try {
            SummaryRow r;
            r.algorithm = f[0];
            r.algorithm_id = f[1];
            r.params = f[2];
            r.scenario = f[3];
            r.horizon = parse_u64(f[4], "horizon");
            r.runs = parse_u64(f[5], "runs");
            r.avg_regret = parse_double(f[6], "avg_regret");
            r.regret_se = parse_double(f[7], "regret_se");
            r.reward_variance = parse_double(f[8], "reward_variance");
            r.subopt_ratio = parse_double(f[9], "subopt_ratio");
            r.p_value = parse_double(f[10], "p_value");
            rows.push_back(std::move(r));
        } catch (const std::invalid_argument& ex) {
            throw DatastoreError(path.string() + ": " + ex.what());
        }
    }
    return rows;
}

std::string format_summary_table(const std::vector<SummaryRow>& rows, std::string_view title) {
    std::size_t name_w = 9;
    for (const auto& r : rows) name_w = std::max(name_w, r.algorithm.size());
    auto pad = [](std::string s, std::size_t w, bool right) {
        if (s.size() >= w) return s;
        return right ? std::string(w - s.size(), ' ') + s : s + std::string(w - s.size(), ' ');
    };
    std::string out(title);
    out += "\n";
    out += pad("Algorithm", name_w, false) + "  " + pad("Average Regret", 15, true) + "  " +
           pad("Reward Variance", 18, true) + "  " + pad("Subopt. Ratio", 13, true) + "  " + pad("p-value", 7, true) + "\n";
    for (const auto& r : rows) {
        out += pad(r.algorithm, name_w, false) + "  " + pad(fixed2(r.avg_regret), 15, true) + "  " +
               pad(fixed2(r.reward_variance), 18, true) + "  " + pad(fixed(r.subopt_ratio, 5), 13, true) + "  " +
               pad(fixed2(r.p_value), 7, true) + "\n";
    }
    return out;
}

}  // namespace bandit
