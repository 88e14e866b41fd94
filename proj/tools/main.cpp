// kirchnorm CLI: constants / fiber / flow / mp / verify / sweep.
//
// Every artifact written under --out embeds the resolved run configuration
// and the directory gets a manifest with the config hash; repeated runs with
// the same config produce byte-identical artifacts (the manifest's timing
// block is the one intentional exception).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "kirchnorm/errors.hpp"
#include "kirchnorm/functionals.hpp"
#include "kirchnorm/io_json.hpp"
#include "kirchnorm/radial_field.hpp"
#include "kirchnorm/regime.hpp"
#include "kirchnorm/solver.hpp"
#include "kirchnorm/version.hpp"

using nlohmann::json;
using namespace kirchnorm;

namespace {

// Exit codes: 0 ok, 1 internal, 2 invalid parameters/usage, 3 outside the
// requested regime, 4 convergence failure, 5 field construction failure,
// 6 verification checks failed, 7 i/o failure.
enum ExitCode {
    kOk = 0,
    kInternal = 1,
    kBadParams = 2,
    kRegime = 3,
    kConvergence = 4,
    kConstruction = 5,
    kChecksFailed = 6,
    kIo = 7,
};

struct CliError {
    int code;
    std::string msg;
};

std::string hex64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)v);
    return buf;
}

// ---------------------------------------------------------------------------
// option sink: config file < flags

struct Opts {
    std::string config_path;
    std::string out_dir;
    int jobs = 0;

    std::optional<int> N;
    std::optional<double> a, mu, q, c_plain;
    std::optional<std::string> b_tok, c_tok; // threshold-relative syntax

    std::optional<std::size_t> cells;
    std::optional<double> r_max, h0, eps_hint, tail_rel;

    std::optional<double> tol, region_cap, tau;
    std::optional<std::size_t> max_iters, trace_stride;
    std::optional<int> recenter_rounds;
    bool use_J = false;

    std::string source = "bubble"; // fiber input
    std::string field_file;
    double sigma = 1.0;

    std::string depth = "quick"; // verify
    std::string regime;
    std::optional<std::size_t> samples;
    std::optional<std::uint64_t> seed;

    std::string axis = "b"; // sweep
    std::vector<std::string> values;

    int mp_n = 0;
    std::optional<std::size_t> t_samples;
};

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream is(path);
    if (!is) throw CliError{kIo, "cannot open config file: " + path};
    json j;
    try {
        is >> j;
    } catch (const std::exception& e) {
        throw CliError{kBadParams,
                       std::string("config parse error: ") + e.what()};
    }
    if (!j.is_object()) throw CliError{kBadParams, "config must be an object"};
    return j;
}

template <typename T>
void take(const json& j, const char* key, std::optional<T>& dst) {
    if (!dst && j.contains(key)) dst = j.at(key).get<T>();
}

// Accepts a plain number or a threshold-relative token like "0.5b0";
// thresholds() is consulted lazily so plain numbers never build a grid.
double resolve_token(const std::string& tok, const char* what,
                     const std::function<ThresholdSet()>& th) {
    const char* s = tok.c_str();
    char* end = nullptr;
    double factor = std::strtod(s, &end);
    if (end == s) factor = 1.0;
    std::string suffix(end);
    if (suffix.empty()) return factor;
    const ThresholdSet t = th();
    std::optional<double> base;
    std::string absent_why;
    if (suffix == "b0") base = t.b0;
    else if (suffix == "b1") base = t.b1;
    else if (suffix == "c0") base = t.c0;
    else if (suffix == "c1") base = t.c1;
    else if (suffix == "k0") base = t.k0;
    else
        throw CliError{kBadParams, std::string(what) + ": unknown threshold '" +
                                       suffix + "' in '" + tok +
                                       "' (use b0, b1, c0, c1 or k0)"};
    if (!base) {
        for (const auto& [name, why] : t.absent)
            if (name == suffix) absent_why = why;
        throw CliError{kBadParams, std::string(what) + ": threshold '" + suffix +
                                       "' is not defined here" +
                                       (absent_why.empty() ? ""
                                                           : " (" + absent_why +
                                                                 ")")};
    }
    return factor * *base;
}

struct Resolved {
    ProblemParams params;
    GridSpec grid;
    FlowConfig flow;
    json echo; // resolved run configuration, embedded in every artifact
};

Resolved resolve(const Opts& o, const json& cfg) {
    Opts m = o; // merged view: absent flags fall back to the file
    if (cfg.contains("params")) {
        const json& jp = cfg.at("params");
        take(jp, "N", m.N);
        take(jp, "a", m.a);
        take(jp, "mu", m.mu);
        take(jp, "q", m.q);
        if (!m.b_tok && jp.contains("b")) {
            const json& v = jp.at("b");
            m.b_tok = v.is_string() ? v.get<std::string>() : v.dump();
        }
        if (!m.c_tok && jp.contains("c")) {
            const json& v = jp.at("c");
            m.c_tok = v.is_string() ? v.get<std::string>() : v.dump();
        }
    }
    if (cfg.contains("grid")) {
        const json& jg = cfg.at("grid");
        take(jg, "cells", m.cells);
        take(jg, "r_max", m.r_max);
        take(jg, "h0", m.h0);
        take(jg, "eps_hint", m.eps_hint);
        take(jg, "tail_rel", m.tail_rel);
    }
    if (cfg.contains("flow")) {
        const json& jf = cfg.at("flow");
        take(jf, "residual_tol", m.tol);
        take(jf, "max_iters", m.max_iters);
        take(jf, "region_cap", m.region_cap);
        take(jf, "tau", m.tau);
        take(jf, "trace_stride", m.trace_stride);
        take(jf, "recenter_rounds", m.recenter_rounds);
        if (!m.use_J && jf.contains("use_J")) m.use_J = jf.at("use_J").get<bool>();
    }

    Resolved r;
    ProblemParams& p = r.params;
    if (m.N) p.N = *m.N;
    if (m.a) p.a = *m.a;
    if (m.mu) p.mu = *m.mu;
    if (m.q) p.q = *m.q;

    // b first: its thresholds need only (N, a, S).
    if (m.b_tok) {
        ProblemParams pb = p;
        pb.b = 0.0;
        pb.c = 1.0;
        p.b = resolve_token(*m.b_tok, "--b", [&pb] {
            ScalarContext ctx{pb, sobolev_constant(pb.N), std::nullopt};
            return thresholds(ctx);
        });
    }
    // c second: c0/c1 need the resolved b (and C_q, hence a grid).
    if (m.c_tok) {
        ProblemParams pc = p;
        pc.c = 1.0;
        GridSpec gq;
        gq.N = p.N;
        if (p.mu != 0.0) gq.q_hint = p.q;
        p.c = resolve_token(*m.c_tok, "--c", [&pc, &gq] {
            std::optional<double> Cq;
            if (pc.mu != 0.0) Cq = gn_constant(make_grid(gq), pc.q);
            ScalarContext ctx{pc, sobolev_constant(pc.N), Cq};
            return thresholds(ctx);
        });
    }
    try {
        p.validate();
    } catch (const RegimeError& e) {
        throw CliError{kBadParams, e.what()};
    }

    GridSpec& gs = r.grid;
    gs.N = p.N;
    if (m.cells) gs.cells = *m.cells;
    if (m.r_max) gs.r_max = *m.r_max;
    if (m.h0) gs.h0 = *m.h0;
    if (m.eps_hint) gs.eps_hint = *m.eps_hint;
    if (m.tail_rel) gs.tail_rel = *m.tail_rel;
    if (p.mu != 0.0) gs.q_hint = p.q;

    FlowConfig& fc = r.flow;
    if (m.tol) fc.residual_tol = *m.tol;
    if (m.max_iters) fc.max_iters = *m.max_iters;
    if (m.region_cap) fc.region_cap = *m.region_cap;
    if (m.tau) fc.tau = *m.tau;
    if (m.trace_stride) fc.trace_stride = *m.trace_stride;
    if (m.recenter_rounds) fc.recenter_rounds = *m.recenter_rounds;
    fc.use_J = m.use_J;

    r.echo = json{
        {"params", to_json(p)},
        {"grid",
         {{"N", gs.N},
          {"cells", gs.cells},
          {"r_max", gs.r_max},
          {"h0", gs.h0},
          {"eps_hint", gs.eps_hint},
          {"q_hint", gs.q_hint},
          {"tail_rel", gs.tail_rel}}},
        {"flow",
         {{"residual_tol", fc.residual_tol},
          {"max_iters", fc.max_iters},
          {"region_cap", fc.region_cap},
          {"use_J", fc.use_J},
          {"tau", fc.tau},
          {"recenter_rounds", fc.recenter_rounds},
          {"trace_stride", fc.trace_stride}}},
        {"version", version_string},
    };
    return r;
}

// ---------------------------------------------------------------------------
// output directory with manifest

class OutputDir {
public:
    OutputDir(std::string dir, std::string command, json config)
        : dir_(std::move(dir)), command_(std::move(command)),
          config_(std::move(config)),
          start_(std::chrono::steady_clock::now()) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec)
            throw CliError{kIo, "cannot create output directory " + dir_ +
                                    ": " + ec.message()};
    }

    void write(const std::string& name, const std::string& content) {
        const std::string path = dir_ + "/" + name;
        std::ofstream os(path, std::ios::binary);
        os << content;
        if (!os) throw CliError{kIo, "write failed: " + path};
        outputs_.push_back(name);
    }

    void write_json(const std::string& name, json j) {
        j["config"] = config_;
        write(name, j.dump(2) + "\n");
    }

    void write_csv(const std::string& name, const std::string& body) {
        // one comment line so the table carries its provenance too
        write(name, "# config = " + config_.dump() + "\n" + body);
    }

    void finalize(bool ok, const std::string& error = {}) {
        if (finalized_) return;
        finalized_ = true;
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start_)
                            .count();
        json m{{"schema", "kirchnorm.manifest/1"},
               {"version", version_string},
               {"command", command_},
               {"config", config_},
               {"config_hash", hex64(config_hash(config_))},
               {"outputs", outputs_},
               {"timings_ms", {{"total", ms}}},
               {"status", ok ? "ok" : "FAILED"}};
        if (!error.empty()) m["error"] = error;
        std::ofstream os(dir_ + "/manifest.json", std::ios::binary);
        os << m.dump(2) << "\n";
    }

private:
    std::string dir_, command_;
    json config_;
    std::vector<std::string> outputs_;
    std::chrono::steady_clock::time_point start_;
    bool finalized_ = false;
};

// ---------------------------------------------------------------------------
// command bodies

void print_threshold_row(const char* name, const std::optional<double>& v,
                         const ThresholdSet& t) {
    if (v) {
        std::printf("  %-18s %.10g\n", name, *v);
        return;
    }
    for (const auto& [n, why] : t.absent)
        if (n == name) {
            std::printf("  %-18s -            (%s)\n", name, why.c_str());
            return;
        }
}

int cmd_constants(const Resolved& r, OutputDir* out) {
    const double S = sobolev_constant(r.params.N);
    std::optional<double> Cq;
    if (r.params.mu != 0.0) Cq = gn_constant(make_grid(r.grid), r.params.q);
    ScalarContext ctx{r.params, S, Cq};
    const ThresholdSet t = thresholds(ctx);

    std::printf("%s\n", r.params.describe().c_str());
    std::printf("  %-18s %.10g\n", "S", S);
    if (Cq) std::printf("  %-18s %.10g\n", "C_q", *Cq);
    std::printf("  %-18s %.10g\n", "b0", t.b0);
    std::printf("  %-18s %.10g\n", "b1", t.b1);
    print_threshold_row("eta", t.eta, t);
    print_threshold_row("xi_minus", t.xi_minus, t);
    print_threshold_row("xi_plus", t.xi_plus, t);
    print_threshold_row("xi1", t.xi1, t);
    print_threshold_row("c_N_minus", t.c_N_minus, t);
    print_threshold_row("c_N_plus", t.c_N_plus, t);
    print_threshold_row("c_N", t.c_N, t);
    print_threshold_row("Lambda", t.Lambda, t);
    print_threshold_row("k0", t.k0, t);
    print_threshold_row("c0", t.c0, t);
    print_threshold_row("c1", t.c1, t);
    print_threshold_row("k_c", t.k_c, t);
    print_threshold_row("fc_at_kc", t.fc_at_kc, t);
    print_threshold_row("xi0_mu", t.xi0_mu, t);
    print_threshold_row("xi_minus_mu", t.xi_minus_mu, t);
    print_threshold_row("xi_plus_mu", t.xi_plus_mu, t);
    print_threshold_row("xi0_mu1", t.xi0_mu1, t);
    print_threshold_row("h1_at_xi_plus_mu", t.h1_at_xi_plus_mu, t);

    json j{{"S", S}, {"thresholds", to_json(t)}};
    if (Cq) j["Cq"] = *Cq;
    if (out) out->write_json("constants.json", j);
    else std::printf("%s\n", j.dump(2).c_str());
    return kOk;
}

RadialField make_source_field(const Resolved& r, const Opts& o) {
    auto grid = make_grid(r.grid);
    if (o.source == "bubble") {
        const double eps = eps_for_mass(*grid, r.params.c);
        return project_mass(make_bubble(grid, eps), r.params.c);
    }
    if (o.source == "gaussian")
        return project_mass(make_gaussian(grid, o.sigma, 1.0), r.params.c);
    if (o.source == "file") {
        if (o.field_file.empty())
            throw CliError{kBadParams, "--source file requires --field"};
        std::ifstream is(o.field_file);
        if (!is) throw CliError{kIo, "cannot open field: " + o.field_file};
        return project_mass(read_json(is), r.params.c);
    }
    throw CliError{kBadParams, "unknown --source '" + o.source +
                                   "' (bubble, gaussian or file)"};
}

int cmd_fiber(const Resolved& r, const Opts& o, OutputDir* out) {
    RadialField u = make_source_field(r, o);
    const double q = r.params.mu != 0.0 ? r.params.q : 0.0;
    const NormTuple t = norm_tuple(u, q);
    const FiberReport fr = fiber_project(t, r.params);

    const char* status = fr.status == ScanStatus::ok        ? "ok"
                         : fr.status == ScanStatus::no_root ? "no_root"
                                                            : "too_many";
    std::printf("fiber: status=%s roots=%zu%s\n", status, fr.roots.size(),
                fr.ill_conditioned ? " (ill-conditioned pair)" : "");
    json roots = json::array();
    for (const FiberRoot& root : fr.roots) {
        std::printf("  s=%+.8g  level=%.10g  class=%s  |grad|=%.10g\n", root.s,
                    root.psi, to_string(root.cls), root.grad_norm);
        roots.push_back(json{{"s", root.s},
                             {"level", root.psi},
                             {"psi2", root.psi2},
                             {"class", to_string(root.cls)},
                             {"grad_norm", root.grad_norm}});
    }
    json j{{"schema", "kirchnorm.fiber/1"},
           {"source", o.source},
           {"status", status},
           {"ill_conditioned", fr.ill_conditioned},
           {"base", to_json(fr.base)},
           {"roots", roots}};
    if (out) out->write_json("fiber.json", j);
    else std::printf("%s\n", j.dump(2).c_str());
    return kOk;
}

std::string trace_csv(const FlowResult& f) {
    std::ostringstream os;
    os << "iter,objective,grad2\n";
    char buf[96];
    for (const auto& row : f.trace) {
        std::snprintf(buf, sizeof buf, "%.0f,%.17g,%.17g\n", row[0], row[1],
                      row[2]);
        os << buf;
    }
    return os.str();
}

int cmd_flow(const Resolved& r, OutputDir* out) {
    auto grid = make_grid(r.grid);
    const double S = sobolev_constant(r.params.N);
    std::optional<double> Cq;
    if (r.params.mu != 0.0) Cq = gn_constant(grid, r.params.q);
    const FlowResult f = local_minimizer(grid, r.params, S, Cq, r.flow);

    std::printf("flow: status=%s iters=%zu objective=%.10g grad2=%.10g "
                "lambda=%.10g el_residual=%.3g\n",
                to_string(f.status), f.iterations, f.objective, f.tuple.grad2,
                f.lambda, f.el_residual);
    for (const std::string& fl : f.flags)
        std::printf("  flag: %s\n", fl.c_str());
    if (out) {
        out->write_json("flow.json", to_json(f));
        std::ostringstream fld;
        kirchnorm::write_json(f.u, fld);
        out->write("field.json", fld.str());
        if (!f.trace.empty()) out->write_csv("trace.csv", trace_csv(f));
    } else {
        std::printf("%s\n", to_json(f).dump(2).c_str());
    }
    return f.status == FlowStatus::converged ? kOk : kConvergence;
}

std::string path_csv(const PathReport& p) {
    std::ostringstream os;
    os << "t,level,grad2\n";
    char buf[96];
    for (std::size_t i = 0; i < p.t.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.t[i],
                      p.level[i], p.grad2[i]);
        os << buf;
    }
    return os.str();
}

int cmd_mp(const Resolved& r, const Opts& o, OutputDir* out) {
    const ProblemParams& p = r.params;
    const double S = sobolev_constant(p.N);
    auto grid = make_grid(r.grid);

    if (p.mu == 0.0 && p.N >= 5) {
        const PathReport pr = mp_path_mu0(grid, p, S);
        std::printf("mp: kind=%s sup=%.10g at t=%.6g end=%.10g\n",
                    pr.kind.c_str(), pr.sup_level, pr.sup_t, pr.end_level);
        json j{{"schema", "kirchnorm.mp/1"}, {"path", to_json(pr)}};
        if (out) {
            out->write_json("mp.json", j);
            out->write_csv("path.csv", path_csv(pr));
        } else {
            std::printf("%s\n", j.dump(2).c_str());
        }
        return kOk;
    }

    // N = 4 concave-convex regime: minimize I and J, then ride the
    // compact-bubble path out of the J-minimizer.
    const std::optional<double> Cq =
        p.mu != 0.0 ? std::optional<double>(gn_constant(grid, p.q))
                    : std::nullopt;
    FlowConfig fcI = r.flow;
    fcI.use_J = false;
    const FlowResult fI = local_minimizer(grid, p, S, Cq, fcI);
    if (fI.status != FlowStatus::converged)
        throw ConvergenceError("mp: I-flow did not converge (status " +
                               std::string(to_string(fI.status)) + ")");
    FlowConfig fcJ = r.flow;
    fcJ.use_J = true;
    const FlowResult fJ = local_minimizer(grid, p, S, Cq, fcJ);
    if (fJ.status != FlowStatus::converged)
        throw ConvergenceError("mp: J-flow did not converge (status " +
                               std::string(to_string(fJ.status)) + ")");

    WPathConfig wc;
    if (o.mp_n > 0) wc.n = o.mp_n;
    if (o.t_samples) wc.t_samples = *o.t_samples;
    const WPathReport wr = mp_path_W(fJ, p, S, fI.objective, wc);
    const MpEstimate est = mp_level_estimate(p, S, Cq, {wr.path}, grid);

    std::printf("mp: kind=%s sup=%.10g threshold=%.10g margin=%.3g\n",
                wr.path.kind.c_str(), wr.path.sup_level, wr.threshold,
                wr.margin);
    std::printf("    level_upper=%.10g barrier_lower=%.10g "
                "barrier_analytic=%.10g\n",
                est.level_upper, est.barrier_lower, est.barrier_analytic);
    json j{{"schema", "kirchnorm.mp/1"},
           {"w_path", to_json(wr)},
           {"flow_I", to_json(fI)},
           {"flow_J", to_json(fJ)},
           {"estimate",
            {{"level_upper", est.level_upper},
             {"barrier_lower", est.barrier_lower},
             {"barrier_analytic", est.barrier_analytic},
             {"barrier_positive", est.barrier_positive}}}};
    if (out) {
        out->write_json("mp.json", j);
        out->write_csv("path.csv", path_csv(wr.path));
    } else {
        std::printf("%s\n", j.dump(2).c_str());
    }
    return kOk;
}

int cmd_verify(const Resolved& r, const Opts& o, OutputDir* out) {
    VerifyOptions vo;
    vo.full = o.depth == "full";
    if (!o.regime.empty()) {
        const auto tag = regime_from_string(o.regime);
        if (!tag)
            throw CliError{kBadParams, "unknown regime tag '" + o.regime + "'"};
        vo.force_tag = tag;
    }
    if (o.samples) vo.random_samples = *o.samples;
    if (o.seed) vo.seed = *o.seed;
    vo.grid = r.grid;

    const RegimeReport rep = verify(r.params, vo);
    std::printf("regime: %s (depth %s)\n", to_string(rep.tag),
                rep.depth.c_str());
    for (const std::string& n : rep.notes)
        std::printf("  note: %s\n", n.c_str());
    for (const CheckResult& c : rep.checks) {
        const std::string suffix =
            c.detail.empty() ? std::string() : "  " + c.detail;
        std::printf("  [%s] %-32s %s  (lhs=%.10g rhs=%.10g)%s\n",
                    c.pass ? "PASS" : c.marginal ? "MARG" : "FAIL",
                    c.name.c_str(), c.claim.c_str(), c.lhs, c.rhs,
                    suffix.c_str());
    }
    const bool ok = rep.passed();
    std::printf("verify: %s (%zu checks)\n", ok ? "PASS" : "FAIL",
                rep.checks.size());
    if (out) out->write_json("verify.json", to_json(rep));
    return ok ? kOk : kChecksFailed;
}

int cmd_sweep(const Resolved& r, const Opts& o, OutputDir* out) {
    if (o.values.empty())
        throw CliError{kBadParams, "sweep: --values required"};
    std::vector<std::string> toks;
    for (const std::string& v : o.values) {
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) toks.push_back(item);
    }
    ProblemParams pb = r.params;
    GridSpec gq = r.grid;
    auto th = [&pb, &gq] {
        std::optional<double> Cq;
        if (pb.mu != 0.0) Cq = gn_constant(make_grid(gq), pb.q);
        ScalarContext ctx{pb, sobolev_constant(pb.N), Cq};
        return thresholds(ctx);
    };
    std::vector<double> values;
    for (const std::string& t : toks)
        values.push_back(resolve_token(t, "--values", th));

    VerifyOptions vo;
    if (o.samples) vo.random_samples = *o.samples;
    if (o.seed) vo.seed = *o.seed;
    vo.grid = r.grid;
    const std::vector<SweepRow> rows = sweep(r.params, o.axis, values, vo);
    const std::string csv = sweep_csv(rows, o.axis);
    if (out) out->write_csv("sweep.csv", csv);
    else std::fputs(csv.c_str(), stdout);
    std::size_t errors = 0;
    for (const SweepRow& row : rows)
        if (row.error) ++errors;
    std::fprintf(stderr, "sweep: %zu rows, %zu errors\n", rows.size(), errors);
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"variational toolkit for the mass-constrained Kirchhoff "
                 "equation at the critical exponent"};
    app.require_subcommand(1);

    Opts o;
    app.add_option("--config", o.config_path, "JSON config file (flags override)");
    app.add_option("--out", o.out_dir, "output directory (with manifest.json)");
    app.add_option("--jobs", o.jobs, "worker threads for sweep/verify");

    auto add_params = [&o](CLI::App* sub) {
        sub->add_option("--N", o.N, "dimension (>= 4)");
        sub->add_option("--a", o.a, "Laplacian coefficient a > 0");
        sub->add_option("--b", o.b_tok,
                        "Kirchhoff coupling (number or e.g. '0.5b0')");
        sub->add_option("--mu", o.mu, "subcritical perturbation strength");
        sub->add_option("--q", o.q, "subcritical exponent (with mu != 0)");
        sub->add_option("--c", o.c_tok, "mass (number or e.g. '0.9c0')");
        sub->add_option("--cells", o.cells, "grid cells");
        sub->add_option("--rmax", o.r_max, "grid radius (0: tail policy)");
        sub->add_option("--h0", o.h0, "first cell width");
        sub->add_option("--eps-hint", o.eps_hint, "core width the grid resolves");
        sub->add_option("--tail-rel", o.tail_rel, "tail truncation target");
    };

    CLI::App* c_const = app.add_subcommand("constants", "thresholds and levels");
    add_params(c_const);

    CLI::App* c_fiber =
        app.add_subcommand("fiber", "dilation-fiber roots of a field");
    add_params(c_fiber);
    c_fiber->add_option("--source", o.source, "bubble | gaussian | file");
    c_fiber->add_option("--field", o.field_file, "field snapshot (json)");
    c_fiber->add_option("--sigma", o.sigma, "gaussian width");

    CLI::App* c_flow =
        app.add_subcommand("flow", "constrained descent to a local minimizer");
    add_params(c_flow);
    c_flow->add_option("--tol", o.tol, "residual tolerance");
    c_flow->add_option("--max-iters", o.max_iters, "iteration cap");
    c_flow->add_option("--region-cap", o.region_cap, "grad2 region cap");
    c_flow->add_flag("--use-J", o.use_J, "minimize the auxiliary objective");
    c_flow->add_option("--trace-stride", o.trace_stride,
                       "record the trajectory every k iterations");
    c_flow->add_option("--recenter-rounds", o.recenter_rounds,
                       "fiber recentering passes");

    CLI::App* c_mp = app.add_subcommand("mp", "mountain-pass path and bounds");
    add_params(c_mp);
    c_mp->add_option("--n", o.mp_n, "compact-bubble truncation index");
    c_mp->add_option("--t-samples", o.t_samples, "path samples");
    c_mp->add_option("--tol", o.tol, "flow residual tolerance");
    c_mp->add_option("--max-iters", o.max_iters, "flow iteration cap");

    CLI::App* c_verify =
        app.add_subcommand("verify", "run the regime's check list");
    add_params(c_verify);
    c_verify->add_option("--depth", o.depth, "quick | full");
    c_verify->add_option("--regime", o.regime, "force a regime tag");
    c_verify->add_option("--samples", o.samples, "random fields per check");
    c_verify->add_option("--seed", o.seed, "sampling seed");

    CLI::App* c_sweep = app.add_subcommand("sweep", "regime map along an axis");
    add_params(c_sweep);
    c_sweep->add_option("--axis", o.axis, "b | c | mu | q");
    c_sweep
        ->add_option("--values", o.values,
                     "axis values (comma separated; threshold-relative ok)")
        ->expected(-1);
    c_sweep->add_option("--samples", o.samples, "random fields per check");
    c_sweep->add_option("--seed", o.seed, "sampling seed");

    for (CLI::App* sub : app.get_subcommands(
             [](const CLI::App*) { return true; }))
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (o.jobs > 0) omp_set_num_threads(o.jobs);
#endif

    std::optional<OutputDir> out;
    try {
        const json cfg = load_config(o.config_path);
        const Resolved r = resolve(o, cfg);
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (!o.out_dir.empty()) out.emplace(o.out_dir, cmd, r.echo);
        OutputDir* op = out ? &*out : nullptr;

        int rc = kInternal;
        if (cmd == "constants") rc = cmd_constants(r, op);
        else if (cmd == "fiber") rc = cmd_fiber(r, o, op);
        else if (cmd == "flow") rc = cmd_flow(r, op);
        else if (cmd == "mp") rc = cmd_mp(r, o, op);
        else if (cmd == "verify") rc = cmd_verify(r, o, op);
        else if (cmd == "sweep") rc = cmd_sweep(r, o, op);
        if (out) out->finalize(rc == kOk || rc == kChecksFailed);
        return rc;
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.msg.c_str());
        if (out) out->finalize(false, e.msg);
        return e.code;
    } catch (const RegimeError& e) {
        std::fprintf(stderr, "regime error: %s\n", e.what());
        if (out) out->finalize(false, e.what());
        return kRegime;
    } catch (const ConvergenceError& e) {
        std::fprintf(stderr, "convergence error: %s\n", e.what());
        if (out) out->finalize(false, e.what());
        return kConvergence;
    } catch (const SupportOverflow& e) {
        std::fprintf(stderr, "field construction error: %s\n", e.what());
        if (out) out->finalize(false, e.what());
        return kConstruction;
    } catch (const MassMismatch& e) {
        std::fprintf(stderr, "field construction error: %s\n", e.what());
        if (out) out->finalize(false, e.what());
        return kConstruction;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        if (out) out->finalize(false, e.what());
        return kBadParams;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        if (out) out->finalize(false, e.what());
        return kInternal;
    }
}
