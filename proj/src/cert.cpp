#include "solvcert/cert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace solvcert {

namespace {

constexpr double kMaxGain = 1e12;

void check_size(const BasePoint& base, std::size_t m) {
    if (m != base.size()) throw std::invalid_argument("certificate: dimension mismatch");
}

CVector difference(std::span<const Complex> a, std::span<const Complex> b) {
    CVector d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

void check_direction(std::span<const Complex> du) {
    const double norm = inf_norm(du);
    if (norm == 0.0) throw std::invalid_argument("gain direction is zero");
    if (std::abs(norm - 1.0) > 1e-9) throw std::invalid_argument("gain direction must have unit infinity norm");
}

CertificateReport finish(const BasePoint& base, double lhs, std::optional<double> r, const CertificateTerms& t) {
    CertificateReport rep;
    rep.lhs = lhs;
    rep.passed = lhs <= 1.0;
    rep.margin = 1.0 - lhs;
    rep.r_used = r;
    rep.terms = t;
    if (r && *r < 1.0) rep.envelope = voltage_envelope(base, *r);
    return rep;
}

}  // namespace

BasePoint base_point_from_solution(std::shared_ptr<const NetworkModel> model, std::span<const Complex> v_star,
                                   std::span<const Complex> s_star) {
    if (!model) throw std::invalid_argument("base_point: null model");
    const std::size_t n = model->n;
    if (v_star.size() != n || s_star.size() != n) throw std::invalid_argument("base_point: dimension mismatch");

    const double residual = inf_norm(pf_residual(*model, v_star, s_star));
    if (residual > 1e-8)
        throw NonConvergenceError("base point does not satisfy the power flow (residual " +
                                      std::to_string(residual) + ")",
                                  CVector(v_star.begin(), v_star.end()), residual);

    BasePoint base;
    base.model = model;
    base.v_star.assign(v_star.begin(), v_star.end());
    base.s_star.assign(s_star.begin(), s_star.end());
    base.gamma_star.resize(n);
    for (std::size_t i = 0; i < n; ++i) base.gamma_star[i] = model->v_zero[i] / v_star[i];

    // Z* = diag(conj V*)^-1 conj(Y^-1) diag(V*)^-1 from a single factorization of Y.
    DenseInverse yinv;
    try {
        yinv = invert_dense(model->y);
    } catch (const SingularMatrixError& e) {
        throw ModelError(std::string("reduced admittance matrix is singular: ") + e.what());
    }
    ComplexMatrix z(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            z(i, k) = std::conj(yinv.inverse(i, k)) / (std::conj(v_star[i]) * v_star[k]);

    // diag(conj V*) Z* diag(V*) conj(Y) must be the identity.
    {
        const ComplexMatrix back =
            scale_rows(conj(std::span<const Complex>(v_star)), scale_columns(z, v_star)) * conj(model->y);
        const double err = inf_norm(back - ComplexMatrix::identity(n));
        if (err > 1e-12 * static_cast<double>(n) * std::max(1.0, yinv.condition_estimate))
            throw InternalConsistencyError("Z* failed the multiply-back check (residual " + std::to_string(err) +
                                           ")");
    }

    base.blocks = assemble_jstar(z, s_star);
    base.m_conj_z = base.blocks.m * conj(z);
    base.n_z = base.blocks.n * z;
    base.z_norm = inf_norm(z);

    // eta(s*) + gamma* = 1 holds for every power-flow solution.
    const CVector e = eta(base, s_star);
    double dev = 0.0;
    for (std::size_t i = 0; i < n; ++i) dev = std::max(dev, std::abs(e[i] + base.gamma_star[i] - 1.0));
    if (dev > 1e-8)
        throw InternalConsistencyError("base point violates eta(s*) + gamma* = 1 (deviation " +
                                       std::to_string(dev) + ")");
    return base;
}

BasePoint base_point(std::shared_ptr<const NetworkModel> model, std::span<const Complex> s_star,
                     const NewtonOptions& opts) {
    if (!model) throw std::invalid_argument("base_point: null model");
    PFSolution sol = solve_with_fallback(*model, s_star, std::span<const CVector>{}, opts);
    if (!sol.converged)
        throw NonConvergenceError("power flow did not converge at the base injection", sol.v, sol.final_mismatch);
    // Polish so the base-point identities hold well inside their tolerances.
    NewtonOptions tight = opts;
    tight.tol = std::min(opts.tol, 1e-12);
    tight.max_iter = 10;
    PFSolution polished = newton_pf(*model, s_star, sol.v, tight);
    if (polished.final_mismatch < sol.final_mismatch) sol = std::move(polished);
    return base_point_from_solution(std::move(model), sol.v, s_star);
}

ComplexMatrix zeta(const BasePoint& base, std::span<const Complex> s) {
    check_size(base, s.size());
    return scale_columns(conj(base.z_star()), conj(s));
}

CVector eta(const BasePoint& base, std::span<const Complex> s) {
    check_size(base, s.size());
    return conj(base.z_star() * s);
}

CertificateTerms certificate_terms(const BasePoint& base, std::span<const Complex> s) {
    check_size(base, s.size());
    const std::size_t n = base.size();
    const ComplexMatrix& z = base.z_star();
    const ComplexMatrix& m = base.blocks.m;
    const ComplexMatrix& nn = base.blocks.n;
    const ComplexMatrix& mz = base.m_conj_z;
    const ComplexMatrix& nz = base.n_z;

    const CVector ds = difference(s, base.s_star);
    const CVector w = z * std::span<const Complex>(ds);

    CertificateTerms t;
    double zs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        Complex first{};
        double first_abs = 0.0, lin_conj = 0.0, lin = 0.0, zsum = 0.0;
        const auto mz_i = mz.row(i);
        const auto nz_i = nz.row(i);
        const auto m_i = m.row(i);
        const auto n_i = nn.row(i);
        const auto z_i = z.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            const Complex a = mz_i[j] * std::conj(ds[j]);
            const Complex e = a + nz_i[j] * ds[j];
            first += e;
            first_abs += std::abs(e);
            lin_conj += std::abs(a + n_i[j] * w[j]);
            lin += std::abs(m_i[j] * std::conj(w[j]) + nz_i[j] * ds[j]);
            zsum += std::abs(z_i[j] * s[j]);
        }
        t.first_vector = std::max(t.first_vector, std::abs(first));
        t.first_matrix = std::max(t.first_matrix, first_abs);
        t.linear_conj = std::max(t.linear_conj, lin_conj);
        t.linear = std::max(t.linear, lin);
        zs = std::max(zs, zsum);
    }
    t.quadratic = base.blocks.inv_jstar_norm * zs;
    return t;
}

VoltageEnvelope voltage_envelope(const BasePoint& base, double r) {
    if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("voltage envelope needs 0 <= r < 1");
    VoltageEnvelope env;
    env.lower.reserve(base.size());
    env.upper.reserve(base.size());
    for (const auto& v : base.v_star) {
        env.lower.push_back(std::abs(v) / (1.0 + r));
        env.upper.push_back(std::abs(v) / (1.0 - r));
    }
    return env;
}

CertificateReport certify_r(const BasePoint& base, std::span<const Complex> s, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("certify_r: radius must be positive");
    const CertificateTerms t = certificate_terms(base, s);
    const double lhs = t.first_vector / r + t.quadratic * r + t.linear_sum();
    return finish(base, lhs, r, t);
}

CertificateReport certify(const BasePoint& base, std::span<const Complex> s) {
    const CertificateTerms t = certificate_terms(base, s);
    const double lhs = 2.0 * std::sqrt(t.first_matrix * t.quadratic) + t.linear_sum();
    std::optional<double> r;
    if (t.quadratic > 0.0) r = std::sqrt(t.first_matrix / t.quadratic);
    return finish(base, lhs, r, t);
}

CertificateReport certify_within(const BasePoint& base, std::span<const Complex> s, double r_max) {
    if (!(r_max > 0.0)) throw std::invalid_argument("certify_within: radius must be positive");
    const CertificateTerms t = certificate_terms(base, s);
    const double a = t.first_vector;
    const double b = t.quadratic;
    double r = r_max;
    if (b > 0.0) r = std::min(r_max, std::sqrt(a / b));
    // a = 0 only when ds = 0, where the bound reduces to c = 0 as r -> 0.
    const double lhs = r > 0.0 ? a / r + b * r + t.linear_sum() : t.linear_sum();
    return finish(base, lhs, r, t);
}

double certified_gain_direction(const BasePoint& base, std::span<const Complex> du, double tol_rel) {
    check_size(base, du.size());
    check_direction(du);
    if (!(tol_rel > 0.0)) throw std::invalid_argument("certified_gain_direction: tol_rel must be positive");

    CVector s(base.size());
    auto passes = [&](double lambda) {
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = base.s_star[i] + lambda * du[i];
        return certify(base, s).passed;
    };
    double lo = 0.0;
    double hi = 4.0 * certified_admissible_gain(base).lambda_cag + 1.0;
    while (passes(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > kMaxGain) return std::numeric_limits<double>::infinity();
    }
    const double floor = 1e-12 * hi;
    while (hi - lo > tol_rel * std::max(lo, floor)) {
        const double mid = 0.5 * (lo + hi);
        (passes(mid) ? lo : hi) = mid;
    }
    return lo;
}

GainReport certified_admissible_gain(const BasePoint& base) {
    GainReport g;
    g.a = inf_norm(base.m_conj_z) + inf_norm(base.n_z);
    g.b = base.blocks.inv_jstar_norm * base.z_norm;
    g.sigma = inf_norm(base.s_star);
    if (!(g.a > 0.0)) throw Error("certified admissible gain undefined: ||M conj(Z*)|| + ||N Z*|| is zero");
    g.cap = 0.5 / g.a;

    // Equality in the strong form, squared:
    //   (4AB - 4A^2) lambda^2 + (4AB sigma + 4A) lambda - 1 = 0.
    // Its root on (0, 0.5/A) is the unique root of the unsquared equation;
    // 2 / (q1 + sqrt(q1^2 + 4 q2)) picks it without cancellation and reduces
    // to the linear root 1/q1 when q2 = 0.
    const double q2 = 4.0 * g.a * g.b - 4.0 * g.a * g.a;
    const double q1 = 4.0 * g.a * g.b * g.sigma + 4.0 * g.a;
    const double disc = q1 * q1 + 4.0 * q2;
    if (disc < 0.0 || q1 <= 0.0) {
        g.lambda_m = 0.0;
        g.certified = false;
    } else {
        g.lambda_m = 2.0 / (q1 + std::sqrt(disc));
    }
    g.lambda_cag = std::min(g.lambda_m, g.cap);
    g.certified = g.certified && g.lambda_cag > 0.0;
    return g;
}

CVector homogeneous_direction(std::size_t n, double power_factor) {
    if (!(power_factor > 0.0 && power_factor <= 1.0))
        throw std::invalid_argument("power factor must lie in (0, 1]");
    const double sin_phi = std::sqrt(std::max(0.0, 1.0 - power_factor * power_factor));
    return CVector(n, Complex(-power_factor, -sin_phi));
}

FixedPointState fixed_point_state(const BasePoint& base, std::span<const Complex> v) {
    check_size(base, v.size());
    FixedPointState st;
    st.y.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] == Complex{}) throw std::invalid_argument("fixed_point_state: zero voltage component");
        st.y[i] = base.v_star[i] / v[i] - 1.0;
    }
    st.gamma_star = base.gamma_star;
    return st;
}

CVector fixed_point_rhs(const BasePoint& base, std::span<const Complex> s, std::span<const Complex> y) {
    check_size(base, s.size());
    check_size(base, y.size());
    const std::size_t n = base.size();
    const ComplexMatrix& m = base.blocks.m;
    const ComplexMatrix& nn = base.blocks.n;

    const CVector ds = difference(s, base.s_star);
    const CVector eta_ds = eta(base, ds);
    const ComplexMatrix zeta_ds = zeta(base, ds);
    const ComplexMatrix zeta_s = zeta(base, s);
    const CVector ybar = conj(y);

    // q = diag(y) zeta(s) conj(y); the conjugate term is conj(q).
    CVector q = zeta_s * std::span<const Complex>(ybar);
    for (std::size_t i = 0; i < n; ++i) q[i] *= y[i];

    // u = eta(ds) o y + zeta(ds) conj(y), the argument hit by M in the linear terms.
    CVector u = zeta_ds * std::span<const Complex>(ybar);
    for (std::size_t i = 0; i < n; ++i) u[i] += eta_ds[i] * y[i];

    CVector m_arg(n), n_arg(n);
    for (std::size_t i = 0; i < n; ++i) {
        m_arg[i] = eta_ds[i] + q[i] + u[i];
        n_arg[i] = std::conj(m_arg[i]);
    }
    const CVector a = m * std::span<const Complex>(m_arg);
    const CVector b = nn * std::span<const Complex>(n_arg);
    CVector out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = -(a[i] + b[i]);
    return out;
}

}  // namespace solvcert
