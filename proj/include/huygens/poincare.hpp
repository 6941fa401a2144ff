#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "huygens/dynamics.hpp"
#include "huygens/params.hpp"

namespace huygens::poincare {

using Complex = std::complex<double>;

// Sparse multivariate polynomial with real coefficients, evaluated over
// complex states. Degrees stay tiny (<= 3) so a flat term list is enough.
class Polynomial {
  public:
    explicit Polynomial(int nvars) : nvars_(nvars) {}

    Polynomial& add(double coeff, std::vector<int> exponents);
    Complex eval(const Eigen::VectorXcd& x) const;
    Polynomial derivative(int var) const;

    int nvars() const { return nvars_; }
    int degree() const;
    bool empty() const { return terms_.empty(); }

  private:
    struct Term {
        double c;
        std::vector<int> e;
    };
    int nvars_;
    std::vector<Term> terms_;
};

// x' = A x + mu * Phi(x) with polynomial Phi.
struct QuasiLinearSystem {
    Eigen::MatrixXd A;
    std::vector<Polynomial> phi;
    double mu = 0;
};

struct EigenDecomposition {
    Eigen::MatrixXcd V;
    Eigen::MatrixXcd Vinv;
    Eigen::VectorXcd lambda;
};

struct EigenGrouping {
    double omega = 1.0;
    std::vector<int> leading;                 // lambda = i*n*omega, n integer
    std::vector<int> leading_mult;            // the n per leading entry
    std::vector<int> secondary;               // lambda = i*(n+1/2)*omega
    std::vector<std::vector<int>> nonspecial; // critical, grouped by offset
    std::vector<int> noncritical;             // negative real part
};

// Everything the averaging operations need, with the leading eigenvector
// columns rescaled so alphas are literal half-amplitudes. kd is the
// position (within `leading`) of the distinguished index: the last leading
// slot with nonzero multiplier.
struct PreparedSystem {
    QuasiLinearSystem system;
    EigenDecomposition decomp;
    EigenGrouping grouping;
    int kd = 0;
    int nodes = 16;
};

QuasiLinearSystem build_system(dynamics::Model model,
                               const params::PoincareParams& p);

// Eigenvectors by null-space extraction against a caller-supplied closed
// form spectrum; columns unit norm with positive-real first nonzero entry.
EigenDecomposition diagonalize(const Eigen::MatrixXd& A,
                               const std::vector<Complex>& spectrum);

EigenGrouping group_eigenvalues(const Eigen::VectorXcd& lambda,
                                double omega = 1.0);

// Rescales each leading column so its first significant entry is exactly 1
// (recomputing Vinv), which makes theta_k = alpha_k e^{i n_k w t} + c.c.
EigenDecomposition normalize_amplitudes(const EigenDecomposition& d,
                                        const EigenGrouping& g);

PreparedSystem prepare(dynamics::Model model, const params::PoincareParams& p,
                       int nodes = 0);
PreparedSystem prepare(QuasiLinearSystem system,
                       const std::vector<Complex>& spectrum,
                       double omega = 1.0, int nodes = 0);

// <f(t) e^{-i n omega t}> over one period by the trapezoid rule, which is
// exact once nodes exceed the trigonometric degree of the integrand.
Complex harmonic_average(const std::function<Complex(double)>& f, int n,
                         double omega = 1.0, int nodes = 16);

// P_s = <F_s(xi0(t)) e^{-i n_s omega t}> with F = Vinv Phi(V xi) and xi0 the
// generating solution carried by `alphas` (one per leading slot, in
// grouping.leading order).
Complex average_P(int s, const Eigen::VectorXcd& alphas,
                  const PreparedSystem& ps);

// Q_s = alpha_k n_k P_s - alpha_s n_s P_k for every leading slot s != kd.
Eigen::VectorXcd amplitude_residual(const Eigen::VectorXcd& alphas,
                                    const PreparedSystem& ps);

enum class Regime { InPhase, AntiPhase };

struct PoincareSolution {
    double r = 0;    // half-amplitude; pendulum swing is 2r
    double phi = 0;  // phase difference, 0 or pi at a classified solution
    Eigen::VectorXcd alphas;
    double delta1 = 0;
    double period = 0;  // T(mu) = 2*pi*(1 - delta1*mu)
    std::vector<Complex> leading_roots;
    std::vector<Complex> nonspecial_roots;
    bool stable = false;
    Regime regime = Regime::InPhase;
    int iterations = 0;
};

struct SolveSeed {
    double r0 = 0;
    double phi0 = 0;
};

struct SolveOptions {
    int max_iterations = 50;
    // Drops the r1 = r2 ansatz and solves (r1, r2, phi) instead; raises
    // DegenerateSolutionError if the amplitudes refuse to coalesce.
    bool asymmetric = false;
};

PoincareSolution solve_amplitudes(const PreparedSystem& ps,
                                  const SolveSeed& seed,
                                  const SolveOptions& opts = {});

// First-order period fraction delta1 = Re(P_k / (i alpha_k n_k omega)).
double period_correction(const Eigen::VectorXcd& alphas,
                         const PreparedSystem& ps);

std::vector<Complex> stability_leading(const Eigen::VectorXcd& alphas,
                                       const PreparedSystem& ps);

std::vector<Complex> stability_nonspecial(const Eigen::VectorXcd& alphas,
                                          const PreparedSystem& ps,
                                          int group);

struct RegimePrediction {
    Regime regime = Regime::InPhase;
    bool exists = false;
    double amplitude = 0;  // 2r
    double period = 0;     // T(mu)
    double delta1 = 0;
    std::optional<bool> stable;  // empty = theorem gives no verdict
    enum class Source { Theorem2, Theorem3, Theorem4 } source = Source::Theorem2;
};

// Closed-form regime predictions; the source tag records which branch
// applied (Theorem2 for SmallSigma, Theorem3 for ThreeDofSigma, Theorem4
// for TwoMass). Always returns the in-phase entry first, then anti-phase.
std::vector<RegimePrediction> closed_form_regimes(
    const params::PoincareParams& p, dynamics::Model model);

const char* to_string(Regime r);
const char* to_string(RegimePrediction::Source s);

}  // namespace huygens::poincare
