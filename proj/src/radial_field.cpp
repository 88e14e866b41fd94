#include "kirchnorm/radial_field.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "kirchnorm/errors.hpp"
#include "kirchnorm/kernels.hpp"

namespace kirchnorm {

RadialField make_bubble(std::shared_ptr<const RadialGrid> grid, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("make_bubble: eps > 0 required");
    RadialField u(std::move(grid));
    const int N = u.grid->dim();
    const double A = std::sqrt(N * (N - 2.0) * eps);
    const double e = (N - 2.0) / 2.0;
    const auto& r = u.grid->nodes();
    for (std::size_t i = 0; i < r.size(); ++i)
        u.values[i] = std::pow(A / (eps + r[i] * r[i]), e);
    return u;
}

RadialField make_truncated_bubble(std::shared_ptr<const RadialGrid> grid, int n) {
    if (grid->dim() != 4)
        throw RegimeError("make_truncated_bubble: grid dimension must be 4");
    if (grid->r_max() < 2.0)
        throw RegimeError("make_truncated_bubble: grid must reach r = 2");
    if (n < 1) throw std::invalid_argument("make_truncated_bubble: n >= 1 required");
    RadialField u(std::move(grid));
    const double amp = 2.0 * std::sqrt(2.0);
    const double nd = n;
    const double ramp = nd / (1.0 + nd * nd);
    const auto& r = u.grid->nodes();
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] < 1.0)
            u.values[i] = amp * nd / (1.0 + nd * nd * r[i] * r[i]);
        else if (r[i] < 2.0)
            u.values[i] = amp * ramp * (2.0 - r[i]);
        else
            u.values[i] = 0.0;
    }
    return u;
}

RadialField make_gaussian(std::shared_ptr<const RadialGrid> grid, double sigma,
                          double amplitude) {
    RadialField u(std::move(grid));
    const auto& r = u.grid->nodes();
    for (std::size_t i = 0; i < r.size(); ++i)
        u.values[i] = amplitude * std::exp(-r[i] * r[i] / (2.0 * sigma * sigma));
    return u;
}

NormTuple norm_tuple(const RadialField& u, double q) {
    const RadialGrid& g = *u.grid;
    const bool with_q = q > 0.0;
    const double two_star = 2.0 * g.dim() / (g.dim() - 2.0);
    kernels::TupleSums s =
        kernels::tuple_sums(g.weights(), u.values, q, two_star, with_q);
    NormTuple t;
    t.grad2 = g.dirichlet(u.values, u.values);
    t.mass2 = s.mass2;
    t.lq = s.lq;
    t.l2star = s.l2star;
    t.q = with_q ? q : 0.0;
    return t;
}

namespace {

// Fritsch-Carlson monotone cubic slopes.
std::vector<double> pchip_slopes(const std::vector<double>& x,
                                 const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> m(n, 0.0);
    if (n < 2) return m;
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        d[i] = (y[i + 1] - y[i]) / h[i];
    }
    auto clip_end = [](double mm, double dd) {
        if (mm * dd <= 0.0) return 0.0;
        if (std::fabs(mm) > 3.0 * std::fabs(dd)) return 3.0 * dd;
        return mm;
    };
    m[0] = clip_end(((2.0 * h[0] + h[1]) * d[0] - h[0] * d[1]) / (h[0] + h[1]), d[0]);
    m[n - 1] = clip_end(((2.0 * h[n - 2] + h[n - 3]) * d[n - 2] -
                         h[n - 2] * d[n - 3]) / (h[n - 2] + h[n - 3]),
                        d[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] * d[i] <= 0.0) {
            m[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    return m;
}

double hermite(double x, double x0, double x1, double y0, double y1, double m0,
               double m1) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return y0 * (2.0 * t3 - 3.0 * t2 + 1.0) + h * m0 * (t3 - 2.0 * t2 + t) +
           y1 * (-2.0 * t3 + 3.0 * t2) + h * m1 * (t3 - t2);
}

} // namespace

RadialField dilate(const RadialField& u, double s, double mass_tol) {
    if (s == 0.0) return u;
    const RadialGrid& g = *u.grid;
    const auto& r = g.nodes();
    const std::vector<double> slopes = pchip_slopes(r, u.values);
    const double es = std::exp(s);
    const double amp = std::exp(0.5 * g.dim() * s);

    RadialField v(u.grid);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double x = es * r[i];
        if (x > g.r_max()) {
            v.values[i] = 0.0;
            continue;
        }
        while (seg + 2 < r.size() && r[seg + 1] < x) ++seg;
        v.values[i] = amp * hermite(x, r[seg], r[seg + 1], u.values[seg],
                                    u.values[seg + 1], slopes[seg], slopes[seg + 1]);
    }

    const double m_in = kernels::weighted_dot(g.weights(), u.values, u.values);
    const double m_out = kernels::weighted_dot(g.weights(), v.values, v.values);
    if (!(std::fabs(m_out - m_in) <= mass_tol * m_in)) {
        std::ostringstream os;
        os << "dilate: mass defect " << std::fabs(m_out - m_in) / m_in
           << " exceeds tolerance " << mass_tol << " at s = " << s
           << " (support pushed past r_max)";
        throw SupportOverflow(os.str());
    }
    return v;
}

RadialField project_mass(const RadialField& u, double c) {
    if (!(c > 0.0)) throw std::invalid_argument("project_mass: c > 0 required");
    const double m = kernels::weighted_dot(u.grid->weights(), u.values, u.values);
    if (!(m > 0.0)) throw std::invalid_argument("project_mass: zero field");
    RadialField v = u;
    const double scale = std::sqrt(c / m);
    for (double& x : v.values) x *= scale;
    return v;
}

RadialField laplacian_apply(const RadialField& u) {
    RadialField v(u.grid);
    u.grid->laplacian(u.values, v.values);
    return v;
}

double eps_for_mass(const RadialGrid& grid, double c) {
    const int N = grid.dim();
    if (N < 5)
        throw RegimeError("eps_for_mass: bubble mass diverges for N = 4");
    // |U_eps|_2^2 = eps * |U_1|_2^2, so one quadrature of U_1^2 suffices.
    const double A = std::sqrt(N * (N - 2.0));
    const double e = N - 2.0;
    const auto& r = grid.nodes();
    std::vector<double> u2(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        u2[i] = std::pow(A / (1.0 + r[i] * r[i]), e);
    const double m1 = grid.integrate(u2);
    return c / m1;
}

// --- snapshots -------------------------------------------------------------

namespace {
std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
} // namespace

void write_csv(const RadialField& u, std::ostream& os) {
    os << "r,value\n";
    const auto& r = u.grid->nodes();
    for (std::size_t i = 0; i < r.size(); ++i)
        os << fmt17(r[i]) << ',' << fmt17(u.values[i]) << '\n';
}

std::vector<std::pair<double, double>> read_csv(std::istream& is) {
    std::vector<std::pair<double, double>> rows;
    std::string line;
    std::getline(is, line); // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        rows.emplace_back(std::stod(line.substr(0, comma)),
                          std::stod(line.substr(comma + 1)));
    }
    return rows;
}

void write_json(const RadialField& u, std::ostream& os) {
    const GridSpec& sp = u.grid->spec();
    nlohmann::json j;
    j["schema"] = "kirchnorm.field/1";
    j["grid"] = {{"N", sp.N},          {"cells", sp.cells},
                 {"r_max", sp.r_max},  {"h0", sp.h0},
                 {"eps_hint", sp.eps_hint}, {"q_hint", sp.q_hint},
                 {"tail_rel", sp.tail_rel}, {"signature", u.grid->signature()}};
    j["values"] = u.values;
    os << j.dump(2) << '\n';
}

RadialField read_json(std::istream& is) {
    nlohmann::json j;
    is >> j;
    if (j.at("schema") != "kirchnorm.field/1")
        throw std::runtime_error("read_json: unknown field schema");
    const auto& gj = j.at("grid");
    GridSpec sp;
    sp.N = gj.at("N");
    sp.cells = gj.at("cells");
    sp.r_max = gj.at("r_max");
    sp.h0 = gj.at("h0");
    sp.eps_hint = gj.at("eps_hint");
    sp.q_hint = gj.at("q_hint");
    sp.tail_rel = gj.at("tail_rel");
    auto grid = make_grid(sp);
    if (grid->signature() != gj.at("signature").get<std::string>())
        throw std::runtime_error("read_json: grid signature mismatch");
    RadialField u(grid);
    u.values = j.at("values").get<std::vector<double>>();
    if (u.values.size() != grid->size())
        throw std::runtime_error("read_json: value count does not match grid");
    return u;
}

} // namespace kirchnorm
