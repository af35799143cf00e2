#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fepinn/harness.hpp"

namespace fepinn {

const char* plan_kind_name(PlanKind k) {
    switch (k) {
        case PlanKind::single_run: return "single_run";
        case PlanKind::lambda_sweep: return "lambda_sweep";
        case PlanKind::ratio_sweep: return "ratio_sweep";
        case PlanKind::variance_check: return "variance_check";
        case PlanKind::inverse_eval: return "inverse_eval";
    }
    throw std::invalid_argument("unknown plan kind");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t idx = 0;
        const double v = std::stod(value, &idx);
        if (trim(value.substr(idx)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config key '" + key + "' has a malformed number: " + value);
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        size_t idx = 0;
        const long long v = std::stoll(value, &idx);
        if (trim(value.substr(idx)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config key '" + key + "' has a malformed integer: " + value);
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
    const long long v = parse_int(key, value);
    if (v < 0) throw std::invalid_argument("config key '" + key + "' must be non-negative");
    return static_cast<uint64_t>(v);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& tok : split_ws(value)) out.push_back(parse_double(key, tok));
    if (out.empty()) throw std::invalid_argument("config key '" + key + "' needs at least one value");
    return out;
}

std::vector<uint64_t> parse_u64_list(const std::string& key, const std::string& value) {
    std::vector<uint64_t> out;
    for (const auto& tok : split_ws(value)) out.push_back(parse_u64(key, tok));
    if (out.empty()) throw std::invalid_argument("config key '" + key + "' needs at least one value");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument("config key '" + key + "' must be true or false");
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void apply_run_override(RunConfig& cfg, const std::string& key, const std::string& value) {
    auto seg_count = [&](Segment seg) {
        const long long n = parse_int(key, value);
        if (n < 0) throw std::invalid_argument("config key '" + key + "' must be non-negative");
        if (n == 0)
            cfg.boundary_counts.erase(seg);
        else
            cfg.boundary_counts[seg] = static_cast<int>(n);
    };

    if (key == "domain_points") cfg.domain_points = static_cast<int>(parse_int(key, value));
    else if (key == "densify") cfg.densify = parse_double(key, value);
    else if (key == "heldout_points") cfg.heldout_points = static_cast<int>(parse_int(key, value));
    else if (key == "heldout_seed") cfg.heldout_seed = parse_u64(key, value);
    else if (key == "boundary_inlet") seg_count(Segment::inlet);
    else if (key == "boundary_outlet") seg_count(Segment::outlet);
    else if (key == "boundary_wall") seg_count(Segment::wall);
    else if (key == "boundary_cylinder") seg_count(Segment::cylinder);
    else if (key == "boundary_initial") seg_count(Segment::initial);
    else if (key == "variance_factor") cfg.variance_factor = parse_double(key, value);
    else if (key == "quantile") cfg.quantile = parse_double(key, value);
    else if (key == "lambda") cfg.lambda = parse_double(key, value);
    else if (key == "phase1_iterations") cfg.phase1_iterations = static_cast<int>(parse_int(key, value));
    else if (key == "phase2_iterations") cfg.phase2_iterations = static_cast<int>(parse_int(key, value));
    else if (key == "phase1_threshold") cfg.phase1_threshold = parse_double(key, value);
    else if (key == "threshold") cfg.threshold = parse_double(key, value);
    else if (key == "adam_lr") cfg.adam_lr = parse_double(key, value);
    else if (key == "init_seed") cfg.init_seed = parse_u64(key, value);
    else if (key == "sampling_seed") cfg.sampling_seed = parse_u64(key, value);
    else if (key == "ensemble_seeds") cfg.ensemble_seeds = parse_u64_list(key, value);
    else if (key == "divergence_guard") cfg.divergence_guard = parse_double(key, value);
    else if (key == "data_labels") cfg.data_labels_path = value;
    else
        throw std::invalid_argument("unknown [run] config key: " + key);
}

/// Rescales the preset's boundary counts so domain/boundary matches `ratio`,
/// preserving the per-segment proportions (every segment keeps >= 1 point).
void apply_ratio(RunConfig& cfg, double ratio) {
    if (!(ratio > 0.0)) throw std::invalid_argument("ratio must be positive");
    if (cfg.boundary_counts.empty())
        throw std::invalid_argument("ratio sweep needs a preset with boundary segments");
    double current = 0.0;
    for (const auto& [seg, n] : cfg.boundary_counts) current += n;
    const double target = static_cast<double>(cfg.domain_points) / ratio;
    for (auto& [seg, n] : cfg.boundary_counts)
        n = std::max(1, static_cast<int>(std::llround(n * target / current)));
}

} // namespace

ExperimentPlan parse_config(std::istream& is) {
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
    std::string section;  // "" = top level
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "grid" && section != "run")
                throw std::invalid_argument("unknown config section: [" + section + "]");
            sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        sections[section].emplace_back(key, value);
    }

    ExperimentPlan plan;
    std::string kind_str, mode = "fe";
    for (const auto& [key, value] : sections[""]) {
        if (key == "kind") kind_str = value;
        else if (key == "preset") plan.preset = value;
        else if (key == "out") plan.out_dir = value;
        else if (key == "jobs") plan.jobs = static_cast<int>(parse_int(key, value));
        else if (key == "save_checkpoints") plan.save_checkpoints = parse_bool(key, value);
        else if (key == "mode") {
            if (value != "fe" && value != "vanilla")
                throw std::invalid_argument("config key 'mode' must be fe or vanilla");
            mode = value;
        } else
            throw std::invalid_argument("unknown config key: " + key);
    }
    if (kind_str.empty()) throw std::invalid_argument("config is missing the 'kind' key");
    if (kind_str == "single_run") plan.kind = PlanKind::single_run;
    else if (kind_str == "lambda_sweep") plan.kind = PlanKind::lambda_sweep;
    else if (kind_str == "ratio_sweep") plan.kind = PlanKind::ratio_sweep;
    else if (kind_str == "variance_check") plan.kind = PlanKind::variance_check;
    else if (kind_str == "inverse_eval") plan.kind = PlanKind::inverse_eval;
    else throw std::invalid_argument("unknown plan kind: " + kind_str);
    if (plan.preset.empty()) throw std::invalid_argument("config is missing the 'preset' key");
    if (plan.jobs < 1) throw std::invalid_argument("jobs must be at least 1");

    plan.base = preset_config(plan.preset);
    for (const auto& [key, value] : sections["run"]) apply_run_override(plan.base, key, value);

    std::vector<double> lambdas, ratios;
    std::vector<uint64_t> seeds;
    for (const auto& [key, value] : sections["grid"]) {
        if (key == "lambdas") lambdas = parse_double_list(key, value);
        else if (key == "ratios") ratios = parse_double_list(key, value);
        else if (key == "seeds") seeds = parse_u64_list(key, value);
        else throw std::invalid_argument("unknown [grid] config key: " + key);
    }
    if (seeds.empty()) seeds = {plan.base.init_seed};

    auto with_seed = [&](uint64_t s) {
        RunConfig cfg = plan.base;
        cfg.init_seed = s;
        return cfg;
    };

    switch (plan.kind) {
        case PlanKind::single_run: {
            PlanEntry e;
            e.id = mode == "vanilla" ? "van" : "fe";
            e.feature_enforcing = mode != "vanilla";
            e.config = plan.base;
            plan.entries.push_back(std::move(e));
            break;
        }
        case PlanKind::lambda_sweep: {
            if (lambdas.empty())
                throw std::invalid_argument("lambda_sweep needs [grid] lambdas");
            for (double l : lambdas)
                for (uint64_t s : seeds) {
                    PlanEntry e;
                    e.id = "van_l" + fmt_short(l) + "_s" + std::to_string(s);
                    e.feature_enforcing = false;
                    e.config = with_seed(s);
                    e.config.lambda = l;
                    plan.entries.push_back(std::move(e));
                }
            break;
        }
        case PlanKind::ratio_sweep: {
            if (ratios.empty()) throw std::invalid_argument("ratio_sweep needs [grid] ratios");
            for (double r : ratios)
                for (uint64_t s : seeds) {
                    for (bool fe : {true, false}) {
                        PlanEntry e;
                        e.id = std::string(fe ? "fe" : "van") + "_r" + fmt_short(r) + "_s" +
                               std::to_string(s);
                        e.feature_enforcing = fe;
                        e.config = with_seed(s);
                        apply_ratio(e.config, r);
                        e.ratio = r;
                        plan.entries.push_back(std::move(e));
                    }
                }
            break;
        }
        case PlanKind::inverse_eval: {
            if (plan.base.benchmark != Benchmark::cylinder_inverse)
                throw std::invalid_argument("inverse_eval needs an inverse-benchmark preset");
            if (lambdas.empty()) lambdas = {plan.base.lambda};
            for (uint64_t s : seeds) {
                PlanEntry e;
                e.id = "fe_s" + std::to_string(s);
                e.feature_enforcing = true;
                e.config = with_seed(s);
                plan.entries.push_back(std::move(e));
            }
            for (double l : lambdas)
                for (uint64_t s : seeds) {
                    PlanEntry e;
                    e.id = "van_l" + fmt_short(l) + "_s" + std::to_string(s);
                    e.feature_enforcing = false;
                    e.config = with_seed(s);
                    e.config.lambda = l;
                    plan.entries.push_back(std::move(e));
                }
            break;
        }
        case PlanKind::variance_check: {
            if (sections["grid"].empty() || seeds.empty())
                throw std::invalid_argument("variance_check needs [grid] seeds");
            plan.variance_seeds = seeds;
            break;
        }
    }

    plan.base.validate();
    for (const PlanEntry& e : plan.entries) e.config.validate();
    return plan;
}

ExperimentPlan parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    return parse_config(is);
}

} // namespace fepinn
