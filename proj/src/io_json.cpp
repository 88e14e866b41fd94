#include "kirchnorm/io_json.hpp"

#include <sstream>

using nlohmann::json;

namespace kirchnorm {

namespace {

json opt_json(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

} // namespace

json to_json(const ProblemParams& p) {
    return json{{"N", p.N}, {"a", p.a},   {"b", p.b},
                {"mu", p.mu}, {"q", p.q}, {"c", p.c}};
}

ProblemParams params_from_json(const json& j) {
    ProblemParams p;
    p.N = j.at("N").get<int>();
    p.a = j.at("a").get<double>();
    p.b = j.at("b").get<double>();
    if (j.contains("mu")) p.mu = j.at("mu").get<double>();
    if (j.contains("q")) p.q = j.at("q").get<double>();
    p.c = j.at("c").get<double>();
    return p;
}

json to_json(const NormTuple& t) {
    return json{{"grad2", t.grad2},
                {"mass2", t.mass2},
                {"lq", t.lq},
                {"l2star", t.l2star},
                {"q", t.q}};
}

json to_json(const ThresholdSet& t) {
    json j{{"N", t.N}, {"a", t.a}, {"S", t.S}, {"b0", t.b0}, {"b1", t.b1}};
    j["eta"] = opt_json(t.eta);
    j["xi_minus"] = opt_json(t.xi_minus);
    j["xi_plus"] = opt_json(t.xi_plus);
    j["xi1"] = opt_json(t.xi1);
    j["c_N_minus"] = opt_json(t.c_N_minus);
    j["c_N_plus"] = opt_json(t.c_N_plus);
    j["c_N"] = opt_json(t.c_N);
    j["Lambda"] = opt_json(t.Lambda);
    j["k0"] = opt_json(t.k0);
    j["c0"] = opt_json(t.c0);
    j["c1"] = opt_json(t.c1);
    j["k_c"] = opt_json(t.k_c);
    j["fc_at_kc"] = opt_json(t.fc_at_kc);
    j["xi0_mu"] = opt_json(t.xi0_mu);
    j["xi_minus_mu"] = opt_json(t.xi_minus_mu);
    j["xi_plus_mu"] = opt_json(t.xi_plus_mu);
    j["xi0_mu1"] = opt_json(t.xi0_mu1);
    j["h1_at_xi_plus_mu"] = opt_json(t.h1_at_xi_plus_mu);
    j["xi_pair_ill_conditioned"] = t.xi_pair_ill_conditioned;
    json absent = json::object();
    for (const auto& [name, why] : t.absent) absent[name] = why;
    j["absent"] = absent;
    return j;
}

json to_json(const FlowResult& r) {
    json j{{"status", to_string(r.status)},
           {"objective", r.objective},
           {"energy_I", r.energy_I},
           {"lambda", r.lambda},
           {"el_residual", r.el_residual},
           {"pohozaev", r.pohozaev},
           {"residual_tol", r.residual_tol},
           {"iterations", r.iterations},
           {"tuple", to_json(r.tuple)},
           {"flags", r.flags}};
    if (!r.trace.empty()) {
        json tr = json::array();
        for (const auto& row : r.trace)
            tr.push_back(json::array({row[0], row[1], row[2]}));
        j["trace"] = tr;
    }
    return j;
}

json to_json(const PathReport& r) {
    return json{{"kind", r.kind},
                {"t", r.t},
                {"level", r.level},
                {"grad2", r.grad2},
                {"sup_level", r.sup_level},
                {"sup_t", r.sup_t},
                {"end_level", r.end_level},
                {"notes", r.notes}};
}

json to_json(const WPathReport& r) {
    return json{{"path", to_json(r.path)},
                {"t_star", r.t_star},
                {"t_bar", r.t_bar},
                {"tau_max_dev", r.tau_max_dev},
                {"threshold", r.threshold},
                {"margin", r.margin}};
}

json to_json(const CheckResult& c) {
    return json{{"name", c.name},   {"claim", c.claim},
                {"pass", c.pass},   {"marginal", c.marginal},
                {"lhs", c.lhs},     {"rhs", c.rhs},
                {"detail", c.detail}};
}

json to_json(const RegimeReport& r) {
    json checks = json::array();
    for (const CheckResult& c : r.checks) checks.push_back(to_json(c));
    json applicable = json::array();
    for (RegimeTag t : r.applicable) applicable.push_back(to_string(t));
    json j{{"schema", r.schema},
           {"tag", to_string(r.tag)},
           {"applicable", applicable},
           {"params", to_json(r.params)},
           {"S", r.S},
           {"depth", r.depth},
           {"thresholds", to_json(r.thresholds)},
           {"checks", checks},
           {"notes", r.notes},
           {"passed", r.passed()}};
    j["Cq"] = opt_json(r.Cq);
    return j;
}

std::uint64_t config_hash(const json& config) {
    // nlohmann::json::dump() emits object keys in sorted order and uses the
    // shortest round-trip representation for doubles, so the dump is already
    // canonical for our purposes.
    const std::string s = config.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string sweep_csv(const std::vector<SweepRow>& rows,
                      const std::string& axis) {
    std::ostringstream os;
    os.precision(17);
    os << axis << ",tag,verify_pass,error,b0,b1,c_N_minus,c_N_plus,Lambda,k0,"
          "c0,c1,error_text\n";
    auto cell = [&os](const std::optional<double>& v) {
        os << ',';
        if (v) os << *v;
    };
    for (const SweepRow& row : rows) {
        os << row.axis_value << ',' << to_string(row.tag) << ','
           << (row.verify_pass ? 1 : 0) << ',' << (row.error ? 1 : 0);
        if (row.error) {
            os << ",,,,,,,,";
        } else {
            os << ',' << row.thresholds.b0 << ',' << row.thresholds.b1;
            cell(row.thresholds.c_N_minus);
            cell(row.thresholds.c_N_plus);
            cell(row.thresholds.Lambda);
            cell(row.thresholds.k0);
            cell(row.thresholds.c0);
            cell(row.thresholds.c1);
        }
        os << ',';
        for (char ch : row.error_text)
            os << (ch == ',' || ch == '\n' ? ';' : ch);
        os << '\n';
    }
    return os.str();
}

} // namespace kirchnorm
