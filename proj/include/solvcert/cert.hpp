#pragma once

// Brouwer fixed-point solvability certificates around a solved base point.
//
// For a base solution (V*, s*) with Z* = diag(conj V*)^-1 conj(Y)^-1 diag(V*)^-1
// and J*^-1 = [[M, N], [conj N, conj M]], an injection s is certified solvable
// when the four-term bound
//
//   a/r + b·r + c <= 1
//
// holds for some radius r > 0, where (with ds = s - s*)
//   a = ||M conj(Z*) conj(ds) + N Z* ds||                      (vector norm)
//   b = ||J*^-1|| · ||Z* diag(s)||
//   c = ||M conj(Z*) diag(conj ds) + N diag(Z* ds)||
//     + ||M diag(conj(Z* ds)) + N Z* diag(ds)||
// The solution then satisfies |V*_i|/(1+r) <= |V_i| <= |V*_i|/(1-r) for r < 1.
// The r-free form replaces the vector norm in `a` by the matrix norm
// ||M conj(Z*) diag(conj ds) + N Z* diag(ds)|| and minimises over r.

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "solvcert/linalg.hpp"
#include "solvcert/netmodel.hpp"
#include "solvcert/pf.hpp"

namespace solvcert {

struct BasePoint {
    std::shared_ptr<const NetworkModel> model;
    CVector v_star;
    CVector s_star;
    /// V0 / V*, componentwise.
    CVector gamma_star;
    /// Z*, M, N and ||J*^-1||.
    JStarBlocks blocks;

    // Products reused by every certificate evaluation.
    ComplexMatrix m_conj_z;  // M conj(Z*)
    ComplexMatrix n_z;       // N Z*
    double z_norm = 0.0;     // ||Z*||

    const ComplexMatrix& z_star() const { return blocks.z_star; }
    std::size_t size() const { return v_star.size(); }
};

/// Solves the power flow at `s_star` and assembles the base point.
/// Throws NonConvergenceError if the power flow fails and BaseValidityError
/// if J* is singular.
BasePoint base_point(std::shared_ptr<const NetworkModel> model, std::span<const Complex> s_star,
                     const NewtonOptions& opts = {});

/// Assembles the base point from an already solved voltage profile. The
/// residual of (v_star, s_star) must be at most 1e-8.
BasePoint base_point_from_solution(std::shared_ptr<const NetworkModel> model, std::span<const Complex> v_star,
                                   std::span<const Complex> s_star);

/// zeta(s) = conj(Z*) diag(conj s)
ComplexMatrix zeta(const BasePoint& base, std::span<const Complex> s);
/// eta(s) = conj(Z* s)
CVector eta(const BasePoint& base, std::span<const Complex> s);

struct CertificateTerms {
    double first_vector = 0.0;  // a, vector-norm form
    double first_matrix = 0.0;  // a, matrix-norm form used by the r-free certificate
    double quadratic = 0.0;     // b
    double linear_conj = 0.0;   // ||M conj(Z*) diag(conj ds) + N diag(Z* ds)||
    double linear = 0.0;        // ||M diag(conj(Z* ds)) + N Z* diag(ds)||
    double linear_sum() const { return linear_conj + linear; }
};

struct VoltageEnvelope {
    std::vector<double> lower;
    std::vector<double> upper;
};

struct CertificateReport {
    double lhs = 0.0;
    bool passed = false;
    double margin = 0.0;
    std::optional<double> r_used;
    /// Present when r_used < 1.
    std::optional<VoltageEnvelope> envelope;
    CertificateTerms terms;
};

CertificateTerms certificate_terms(const BasePoint& base, std::span<const Complex> s);

/// Four-term certificate at a fixed radius. Throws std::invalid_argument for r <= 0.
CertificateReport certify_r(const BasePoint& base, std::span<const Complex> s, double r);

/// r-free certificate: 2 sqrt(a_mat · b) + c <= 1, with r_used = sqrt(a_mat / b).
CertificateReport certify(const BasePoint& base, std::span<const Complex> s);

/// Membership in the union of fixed-radius regions over all radii in
/// (0, r_max]: the four-term bound evaluated at min(r_max, sqrt(a/b)).
CertificateReport certify_within(const BasePoint& base, std::span<const Complex> s, double r_max);

/// Envelope |V*_i|/(1+r), |V*_i|/(1-r); requires 0 <= r < 1.
VoltageEnvelope voltage_envelope(const BasePoint& base, double r);

/// Largest lambda such that s* + lambda·du passes `certify`, by bracketing
/// and bisection to relative width tol_rel. `du` must have unit norm.
double certified_gain_direction(const BasePoint& base, std::span<const Complex> du, double tol_rel = 1e-6);

struct GainReport {
    double lambda_cag = 0.0;
    double lambda_m = 0.0;
    /// 0.5 / (||M conj Z*|| + ||N Z*||)
    double cap = 0.0;
    double a = 0.0;      // ||M conj Z*|| + ||N Z*||
    double b = 0.0;      // ||J*^-1|| ||Z*||
    double sigma = 0.0;  // ||s*||
    /// False when no positive certified gain exists.
    bool certified = true;
    std::optional<double> lambda_b;
    std::optional<double> lambda_r;
    std::optional<CVector> direction;
};

/// Direction-independent certified admissible gain from the strong form
///   2 sqrt(A·B·lambda(sigma + lambda)) + 2·A·lambda <= 1.
/// Throws Error when A = 0.
GainReport certified_admissible_gain(const BasePoint& base);

/// Unit-norm direction loading every PQ bus equally at power factor `pf`
/// (consumption, i.e. negative injection).
CVector homogeneous_direction(std::size_t n, double power_factor);

// ---------------------------------------------------------------------------
// Fixed-point form of the power-flow equations around the base point.

struct FixedPointState {
    CVector y;           // V*/V - 1
    CVector gamma_star;  // V0/V*
};

FixedPointState fixed_point_state(const BasePoint& base, std::span<const Complex> v);

/// Right-hand side of the fixed-point map y -> T(y) whose fixed points are
/// exactly the power-flow solutions V = V* / (1 + y):
///   T(y) = -(M eta(ds) + N conj(eta(ds)))
///          - (M diag(y) zeta(s) conj(y) + N diag(conj y) conj(zeta(s)) y)
///          - (M diag(eta(ds)) + N conj(zeta(ds))) y
///          - (M zeta(ds) + N diag(conj(eta(ds)))) conj(y)
CVector fixed_point_rhs(const BasePoint& base, std::span<const Complex> s, std::span<const Complex> y);

}  // namespace solvcert
