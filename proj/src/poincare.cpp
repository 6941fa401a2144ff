#include "huygens/poincare.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "huygens/linear.hpp"

namespace huygens::poincare {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

constexpr double kPi = std::numbers::pi;

// Shared numeric conventions. kGroupTol decides eigenvalue identity, the
// resonance band refuses points where the integer/half-integer test is
// numerically ambiguous instead of silently picking a side.
constexpr double kGroupTol = 1e-9;
constexpr double kResonanceBand = 1e-6;
constexpr double kPivotTol = 1e-9;
constexpr double kReconstructTol = 1e-10;
constexpr double kResidualTol = 1e-12;  // converged max |Q_s|
constexpr double kStepTol = 1e-14;      // polish step floor
constexpr double kCollapseTol = 1e-8;   // r at or below this is the trivial basin
constexpr double kPhaseTol = 1e-6;      // phase snap to 0 / pi
constexpr double kRootTol = 1e-9;       // stability margin on Re
constexpr int kDefaultNodes = 16;

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::string fmt(const Complex& z) {
    std::ostringstream os;
    os << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag())
       << "i";
    return os.str();
}

// Kernel basis of M by row-reduction with partial pivoting. The pivot
// threshold rescales with the largest entry still in play so rank decisions
// survive badly scaled rows. Each free column yields one special solution.
std::vector<VectorXcd> kernel_basis(MatrixXcd M) {
    const int nr = static_cast<int>(M.rows());
    const int nc = static_cast<int>(M.cols());
    std::vector<int> pivot_cols;
    int row = 0;
    for (int col = 0; col < nc && row < nr; ++col) {
        const double thresh = kPivotTol * (1.0 + M.cwiseAbs().maxCoeff());
        int best = row;
        for (int r = row + 1; r < nr; ++r)
            if (std::abs(M(r, col)) > std::abs(M(best, col))) best = r;
        if (std::abs(M(best, col)) <= thresh) continue;
        M.row(best).swap(M.row(row));
        M.row(row) /= M(row, col);
        M(row, col) = 1.0;
        for (int r = 0; r < nr; ++r) {
            if (r == row) continue;
            const Complex f = M(r, col);
            if (f != 0.0) {
                M.row(r) -= f * M.row(row);
                M(r, col) = 0.0;
            }
        }
        pivot_cols.push_back(col);
        ++row;
    }
    std::vector<VectorXcd> basis;
    std::size_t next = 0;
    for (int col = 0; col < nc; ++col) {
        if (next < pivot_cols.size() && pivot_cols[next] == col) {
            ++next;
            continue;
        }
        VectorXcd v = VectorXcd::Zero(nc);
        v(col) = 1.0;
        for (std::size_t i = 0; i < pivot_cols.size(); ++i)
            v(pivot_cols[i]) = -M(static_cast<int>(i), col);
        basis.push_back(std::move(v));
    }
    return basis;
}

// Generating solution alphas for the two-pendulum ansatz: the first slot of
// each conjugate pair carries the phase, the second is pinned real, which
// fixes the rotation gauge. Zero-multiplier slots stay at zero.
VectorXcd ansatz_alphas(const EigenGrouping& g, double r1, double r2,
                        double phi) {
    const int k = static_cast<int>(g.leading.size());
    VectorXcd al = VectorXcd::Zero(k);
    int plus_seen = 0, minus_seen = 0;
    const double c = std::cos(phi), s = std::sin(phi);
    for (int j = 0; j < k; ++j) {
        const int n = g.leading_mult[j];
        if (n == 1)
            al(j) = plus_seen++ == 0 ? Complex(r1 * c, r1 * s) : Complex(r2, 0);
        else if (n == -1)
            al(j) = minus_seen++ == 0 ? Complex(r1 * c, -r1 * s) : Complex(r2, 0);
    }
    return al;
}

// P_s for every leading slot in one sweep; the Phi evaluation per node is
// shared across slots. The trapezoid rule on a period is exact here because
// the integrand is a trigonometric polynomial of degree below the node count.
VectorXcd average_all(const VectorXcd& alphas, const PreparedSystem& ps) {
    const auto& g = ps.grouping;
    const int k = static_cast<int>(g.leading.size());
    if (alphas.size() != k)
        throw ShapeError("alpha vector needs one slot per leading eigenvalue");
    const int d = static_cast<int>(ps.system.A.rows());
    const double period = 2.0 * kPi / g.omega;
    VectorXcd P = VectorXcd::Zero(k);
    VectorXcd xi(d), phi_val(d);
    for (int q = 0; q < ps.nodes; ++q) {
        const double t = period * q / ps.nodes;
        xi.setZero();
        for (int j = 0; j < k; ++j)
            xi(g.leading[j]) =
                alphas(j) * std::polar(1.0, g.leading_mult[j] * g.omega * t);
        const VectorXcd x = ps.decomp.V * xi;
        for (int r = 0; r < d; ++r) phi_val(r) = ps.system.phi[r].eval(x);
        const VectorXcd F = ps.decomp.Vinv * phi_val;
        for (int s = 0; s < k; ++s)
            P(s) += F(g.leading[s]) *
                    std::polar(1.0, -g.leading_mult[s] * g.omega * t);
    }
    return P / double(ps.nodes);
}

// Roots via the characteristic polynomial (Faddeev-LeVerrier) and its
// companion matrix, so the reported set is exactly the root set of the
// polynomial the closed forms factor.
std::vector<Complex> poly_eigenvalues(const MatrixXcd& B) {
    const int m = static_cast<int>(B.rows());
    if (m == 0) return {};
    std::vector<Complex> c(m + 1);
    c[0] = 1.0;
    MatrixXcd Mk = MatrixXcd::Zero(m, m);
    for (int k = 1; k <= m; ++k) {
        Mk = B * Mk + c[k - 1] * MatrixXcd::Identity(m, m);
        c[k] = -(B * Mk).trace() / double(k);
    }
    MatrixXcd comp = MatrixXcd::Zero(m, m);
    for (int i = 0; i + 1 < m; ++i) comp(i + 1, i) = 1.0;
    for (int i = 0; i < m; ++i) comp(i, m - 1) = -c[m - i];
    Eigen::ComplexEigenSolver<MatrixXcd> es(comp);
    if (es.info() != Eigen::Success)
        throw NumericError("companion eigensolver failed");
    std::vector<Complex> roots(m);
    for (int i = 0; i < m; ++i) roots[i] = es.eigenvalues()(i);
    return roots;
}

}  // namespace

Polynomial& Polynomial::add(double coeff, std::vector<int> exponents) {
    if (static_cast<int>(exponents.size()) != nvars_)
        throw ShapeError("term arity does not match polynomial arity");
    for (int e : exponents)
        if (e < 0) throw InvalidParameterError("negative exponent");
    terms_.push_back({coeff, std::move(exponents)});
    return *this;
}

Complex Polynomial::eval(const Eigen::VectorXcd& x) const {
    if (x.size() != nvars_)
        throw ShapeError("evaluation point does not match polynomial arity");
    Complex acc = 0.0;
    for (const Term& t : terms_) {
        Complex v = t.c;
        for (int i = 0; i < nvars_; ++i)
            for (int rep = 0; rep < t.e[i]; ++rep) v *= x(i);
        acc += v;
    }
    return acc;
}

Polynomial Polynomial::derivative(int var) const {
    if (var < 0 || var >= nvars_)
        throw ShapeError("derivative variable out of range");
    Polynomial out(nvars_);
    for (const Term& t : terms_) {
        if (t.e[var] == 0) continue;
        std::vector<int> e = t.e;
        e[var] -= 1;
        out.terms_.push_back({t.c * t.e[var], std::move(e)});
    }
    return out;
}

int Polynomial::degree() const {
    int deg = 0;
    for (const Term& t : terms_) {
        int s = 0;
        for (int e : t.e) s += e;
        deg = std::max(deg, s);
    }
    return deg;
}

QuasiLinearSystem build_system(dynamics::Model model,
                               const params::PoincareParams& p) {
    using dynamics::Model;
    p.validate();
    if (p.n != 2)
        throw InvalidParameterError("averaged systems are assembled for n = 2");
    const double w2 = p.omega * p.omega;
    const double ag2 = p.a * p.gamma * p.gamma;
    const double n = 2.0;

    QuasiLinearSystem s;
    s.mu = p.mu;

    if (model == Model::SmallSigma || model == Model::ThreeDofSigma) {
        const int d = 6;
        s.A = Eigen::MatrixXd::Zero(d, d);
        s.A(0, 1) = 1.0;
        s.A(2, 3) = 1.0;
        s.A(4, 5) = 1.0;
        s.A(1, 0) = -1.0;
        s.A(3, 2) = -1.0;
        s.A(1, 4) = w2;
        s.A(3, 4) = w2;
        s.A(5, 4) = -w2;
        // fdy is the dy coefficient inside the frame force: n*sigma when the
        // damping sits at order one, b = sigma/mu when it is pushed to order
        // mu. The latter needs mu > 0 to carry a nonzero sigma.
        double fdy = 0.0;
        if (model == Model::ThreeDofSigma) {
            s.A(1, 5) = p.sigma;
            s.A(3, 5) = p.sigma;
            s.A(5, 5) = -p.sigma;
            fdy = n * p.sigma;
        } else {
            if (p.mu == 0.0 && p.sigma > 0.0)
                throw InvalidParameterError(
                    "small-sigma model needs mu > 0 when sigma > 0");
            fdy = p.mu > 0.0 ? p.sigma / p.mu : 0.0;
        }
        const std::vector<std::pair<double, std::vector<int>>> frame_force = {
            {-fdy, {0, 0, 0, 0, 0, 1}}, {-n * w2, {0, 0, 0, 0, 1, 0}},
            {1.0, {1, 0, 0, 0, 0, 0}},  {1.0, {1, 2, 0, 0, 0, 0}},
            {1.0, {0, 0, 1, 0, 0, 0}},  {1.0, {0, 0, 1, 2, 0, 0}},
        };
        auto with_force = [&](Polynomial poly, double sign) {
            for (const auto& [c, e] : frame_force) poly.add(sign * c, e);
            return poly;
        };
        Polynomial phi1(d), phi3(d);
        phi1.add(ag2, {0, 1, 0, 0, 0, 0}).add(-p.a, {2, 1, 0, 0, 0, 0});
        phi3.add(ag2, {0, 0, 0, 1, 0, 0}).add(-p.a, {0, 0, 2, 1, 0, 0});
        s.phi.push_back(Polynomial(d));
        s.phi.push_back(with_force(std::move(phi1), -1.0));
        s.phi.push_back(Polynomial(d));
        s.phi.push_back(with_force(std::move(phi3), -1.0));
        s.phi.push_back(Polynomial(d));
        s.phi.push_back(with_force(Polynomial(d), 1.0));
        return s;
    }

    if (model == Model::TwoMass) {
        if (!p.kappa)
            throw InvalidParameterError("two-mass model needs kappa");
        const double kp = *p.kappa;
        const int d = 8;
        s.A = Eigen::MatrixXd::Zero(d, d);
        s.A(0, 1) = 1.0;
        s.A(2, 3) = 1.0;
        s.A(4, 5) = 1.0;
        s.A(6, 7) = 1.0;
        s.A(1, 0) = -1.0;
        s.A(1, 4) = kp;
        s.A(1, 5) = p.sigma;
        s.A(1, 6) = -kp;
        s.A(3, 2) = -1.0;
        s.A(3, 4) = -kp;
        s.A(3, 6) = kp;
        s.A(3, 7) = p.sigma;
        s.A(5, 4) = -kp;
        s.A(5, 5) = -p.sigma;
        s.A(5, 6) = kp;
        s.A(7, 4) = kp;
        s.A(7, 6) = -kp;
        s.A(7, 7) = -p.sigma;
        const std::vector<std::pair<double, std::vector<int>>> f1 = {
            {-p.sigma, {0, 0, 0, 0, 0, 1, 0, 0}},
            {-kp, {0, 0, 0, 0, 1, 0, 0, 0}},
            {kp, {0, 0, 0, 0, 0, 0, 1, 0}},
            {1.0, {1, 0, 0, 0, 0, 0, 0, 0}},
            {1.0, {1, 2, 0, 0, 0, 0, 0, 0}},
        };
        const std::vector<std::pair<double, std::vector<int>>> f2 = {
            {-p.sigma, {0, 0, 0, 0, 0, 0, 0, 1}},
            {kp, {0, 0, 0, 0, 1, 0, 0, 0}},
            {-kp, {0, 0, 0, 0, 0, 0, 1, 0}},
            {1.0, {0, 0, 1, 0, 0, 0, 0, 0}},
            {1.0, {0, 0, 1, 2, 0, 0, 0, 0}},
        };
        auto add_terms =
            [](Polynomial poly,
               const std::vector<std::pair<double, std::vector<int>>>& terms,
               double sign) {
                for (const auto& [c, e] : terms) poly.add(sign * c, e);
                return poly;
            };
        Polynomial phi1(d), phi3(d);
        phi1.add(ag2, {0, 1, 0, 0, 0, 0, 0, 0})
            .add(-p.a, {2, 1, 0, 0, 0, 0, 0, 0});
        phi3.add(ag2, {0, 0, 0, 1, 0, 0, 0, 0})
            .add(-p.a, {0, 0, 2, 1, 0, 0, 0, 0});
        s.phi.push_back(Polynomial(d));
        s.phi.push_back(add_terms(std::move(phi1), f1, -1.0));
        s.phi.push_back(Polynomial(d));
        s.phi.push_back(add_terms(std::move(phi3), f2, -1.0));
        s.phi.push_back(Polynomial(d));
        s.phi.push_back(add_terms(Polynomial(d), f1, 1.0));
        s.phi.push_back(Polynomial(d));
        s.phi.push_back(add_terms(Polynomial(d), f2, 1.0));
        return s;
    }

    throw InvalidParameterError(
        "quasi-linear form exists for the small-parameter models only");
}

EigenDecomposition diagonalize(const Eigen::MatrixXd& A,
                               const std::vector<Complex>& spectrum) {
    const int d = static_cast<int>(A.rows());
    if (A.cols() != d) throw ShapeError("A must be square");
    if (static_cast<int>(spectrum.size()) != d)
        throw ShapeError("spectrum size must match A");
    const MatrixXcd Ac = A.cast<Complex>();

    EigenDecomposition out;
    out.V = MatrixXcd::Zero(d, d);
    out.lambda = VectorXcd(d);
    for (int i = 0; i < d; ++i) out.lambda(i) = spectrum[i];

    std::vector<bool> used(d, false);
    for (int i = 0; i < d; ++i) {
        if (used[i]) continue;
        std::vector<int> members;
        for (int j = i; j < d; ++j)
            if (!used[j] && std::abs(spectrum[j] - spectrum[i]) < kGroupTol)
                members.push_back(j);
        MatrixXcd shifted = Ac - spectrum[i] * MatrixXcd::Identity(d, d);
        const auto basis = kernel_basis(std::move(shifted));
        if (basis.size() != members.size())
            throw DegeneracyError(
                "eigenvalue " + fmt(spectrum[i]) + ": eigenspace dimension " +
                std::to_string(basis.size()) + " does not match multiplicity " +
                std::to_string(members.size()));
        for (std::size_t m = 0; m < members.size(); ++m) {
            VectorXcd v = basis[m] / basis[m].norm();
            for (int r = 0; r < d; ++r) {
                if (std::abs(v(r)) > 1e-12) {
                    v *= std::conj(v(r)) / std::abs(v(r));
                    break;
                }
            }
            out.V.col(members[m]) = v;
            used[members[m]] = true;
        }
    }
    out.Vinv = out.V.inverse();
    const double err =
        (out.V * out.lambda.asDiagonal() * out.Vinv - Ac).cwiseAbs().maxCoeff();
    if (!(err < kReconstructTol))
        throw NumericError("eigendecomposition reconstruction error " +
                           fmt(err) + " exceeds " + fmt(kReconstructTol));
    return out;
}

EigenGrouping group_eigenvalues(const Eigen::VectorXcd& lambda, double omega) {
    if (!(omega > 0)) throw InvalidParameterError("omega must be positive");
    EigenGrouping g;
    g.omega = omega;
    for (int i = 0; i < lambda.size(); ++i) {
        const Complex lam = lambda(i);
        if (lam.real() > kGroupTol)
            throw InvalidParameterError(
                "eigenvalue " + fmt(lam) +
                " has positive real part; the rest state is unstable");
        if (lam.real() < -kGroupTol) {
            g.noncritical.push_back(i);
            continue;
        }
        const double nu = lam.imag() / omega;
        const double n_int = std::round(nu);
        const double n_half = std::round(nu - 0.5) + 0.5;
        if (std::abs(nu - n_int) < kGroupTol) {
            g.leading.push_back(i);
            g.leading_mult.push_back(static_cast<int>(n_int));
            continue;
        }
        if (std::abs(nu - n_half) < kGroupTol) {
            g.secondary.push_back(i);
            continue;
        }
        if (std::abs(nu - n_int) < kResonanceBand ||
            std::abs(nu - n_half) < kResonanceBand)
            throw ResonanceWarning(
                "critical eigenvalue " + fmt(lam) + " lies within " +
                fmt(kResonanceBand) +
                " of a multiple of omega/2; averaging needs the spectrum "
                "bounded away from such resonances");
        bool placed = false;
        for (auto& grp : g.nonspecial) {
            const double ref = lambda(grp.front()).imag() / omega;
            const double off = nu - ref;
            if (std::abs(off - std::round(off)) < kGroupTol) {
                grp.push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) g.nonspecial.push_back({i});
    }
    return g;
}

EigenDecomposition normalize_amplitudes(const EigenDecomposition& d,
                                        const EigenGrouping& g) {
    EigenDecomposition out = d;
    for (int idx : g.leading) {
        bool found = false;
        for (int r = 0; r < out.V.rows(); ++r) {
            const Complex v = out.V(r, idx);
            if (std::abs(v) > 1e-9) {
                out.V.col(idx) /= v;
                found = true;
                break;
            }
        }
        if (!found)
            throw NumericError("leading eigenvector is numerically zero");
    }
    out.Vinv = out.V.inverse();
    const int n = static_cast<int>(out.V.rows());
    const double err =
        (out.V * out.Vinv - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!(err < kReconstructTol))
        throw NumericError("eigenvector basis lost invertibility after "
                           "amplitude normalization");
    return out;
}

PreparedSystem prepare(QuasiLinearSystem system,
                       const std::vector<Complex>& spectrum, double omega,
                       int nodes) {
    const int d = static_cast<int>(system.A.rows());
    if (system.A.cols() != d) throw ShapeError("A must be square");
    if (static_cast<int>(system.phi.size()) != d)
        throw ShapeError("Phi needs one polynomial per state row");
    for (const Polynomial& poly : system.phi)
        if (poly.nvars() != d)
            throw ShapeError("Phi polynomial arity must match the state size");
    if (static_cast<int>(spectrum.size()) != d)
        throw ShapeError("spectrum size must match the state size");
    if (system.mu < 0) throw InvalidParameterError("mu must be non-negative");

    PreparedSystem ps;
    ps.system = std::move(system);
    // Group from the requested spectrum first: a near-resonant spectrum is a
    // parameter problem and should be reported as such, not as the
    // conditioning failure the eigenbasis would produce downstream.
    Eigen::VectorXcd lam(d);
    for (int i = 0; i < d; ++i) lam(i) = spectrum[i];
    ps.grouping = group_eigenvalues(lam, omega);
    ps.decomp = diagonalize(ps.system.A, spectrum);
    ps.decomp = normalize_amplitudes(ps.decomp, ps.grouping);
    ps.kd = -1;
    for (std::size_t j = 0; j < ps.grouping.leading.size(); ++j)
        if (ps.grouping.leading_mult[j] != 0) ps.kd = static_cast<int>(j);
    if (ps.kd < 0)
        throw InvalidParameterError(
            "no oscillatory leading eigenvalues; nothing to average over");
    ps.nodes = nodes > 0 ? nodes : kDefaultNodes;
    return ps;
}

PreparedSystem prepare(dynamics::Model model, const params::PoincareParams& p,
                       int nodes) {
    using dynamics::Model;
    p.validate();
    if (!(p.mu > 0)) throw InvalidParameterError("averaging needs mu > 0");
    if (model == Model::ThreeDofSigma &&
        std::abs(p.sigma * p.sigma - 4.0 * p.omega * p.omega) < 1e-10)
        throw DegeneracyError(
            "frame modes collide at sigma = 2*omega; spectrum is defective");
    if (model == Model::TwoMass) {
        if (!p.kappa)
            throw InvalidParameterError("two-mass model needs kappa");
        if (std::abs(p.sigma * p.sigma - 8.0 * (*p.kappa)) < 1e-10)
            throw DegeneracyError(
                "frame modes collide at sigma^2 = 8*kappa; spectrum is "
                "defective");
    }
    QuasiLinearSystem sys = build_system(model, p);
    const linear::ModeSet modes = linear::generating_modes(model, p);
    return prepare(std::move(sys), modes.eigenvalues, 1.0, nodes);
}

Complex harmonic_average(const std::function<Complex(double)>& f, int n,
                         double omega, int nodes) {
    if (!f) throw InvalidParameterError("empty integrand");
    if (!(omega > 0)) throw InvalidParameterError("omega must be positive");
    if (nodes < 1) throw InvalidParameterError("nodes must be >= 1");
    const double period = 2.0 * kPi / omega;
    Complex acc = 0.0;
    for (int q = 0; q < nodes; ++q) {
        const double t = period * q / nodes;
        acc += f(t) * std::polar(1.0, -n * omega * t);
    }
    return acc / double(nodes);
}

Complex average_P(int s, const Eigen::VectorXcd& alphas,
                  const PreparedSystem& ps) {
    if (s < 0 || s >= static_cast<int>(ps.grouping.leading.size()))
        throw InvalidParameterError("leading slot index out of range");
    return average_all(alphas, ps)(s);
}

Eigen::VectorXcd amplitude_residual(const Eigen::VectorXcd& alphas,
                                    const PreparedSystem& ps) {
    const auto& g = ps.grouping;
    const int k = static_cast<int>(g.leading.size());
    const VectorXcd P = average_all(alphas, ps);
    VectorXcd Q(k - 1);
    int idx = 0;
    for (int s = 0; s < k; ++s) {
        if (s == ps.kd) continue;
        Q(idx++) = alphas(ps.kd) * double(g.leading_mult[ps.kd]) * P(s) -
                   alphas(s) * double(g.leading_mult[s]) * P(ps.kd);
    }
    return Q;
}

double period_correction(const Eigen::VectorXcd& alphas,
                         const PreparedSystem& ps) {
    const auto& g = ps.grouping;
    const Complex P_kd = average_all(alphas, ps)(ps.kd);
    const Complex denom = Complex(0.0, 1.0) * alphas(ps.kd) *
                          double(g.leading_mult[ps.kd]) * g.omega;
    if (std::abs(denom) == 0.0)
        throw DegenerateSolutionError(
            "period correction undefined at zero distinguished amplitude");
    return (P_kd / denom).real();
}

std::vector<Complex> stability_leading(const Eigen::VectorXcd& alphas,
                                       const PreparedSystem& ps) {
    const auto& g = ps.grouping;
    const int k = static_cast<int>(g.leading.size());
    if (alphas.size() != k)
        throw ShapeError("alpha vector needs one slot per leading eigenvalue");

    // Active slots: oscillatory leading slots other than the distinguished
    // one. Zero-multiplier slots contribute identically zero rows and
    // columns and are dropped rather than carried as spurious zero roots.
    std::vector<int> act;
    for (int s = 0; s < k; ++s)
        if (s != ps.kd && g.leading_mult[s] != 0) act.push_back(s);
    const int m = static_cast<int>(act.size());
    if (m == 0) return {};
    auto qrow = [&](int s) { return s < ps.kd ? s : s - 1; };

    MatrixXcd M(m, m);
    for (int jj = 0; jj < m; ++jj) {
        const int j = act[jj];
        const double h = 1e-6 * std::max(1.0, std::abs(alphas(j)));
        VectorXcd ap = alphas, am = alphas;
        ap(j) += h;
        am(j) -= h;
        const VectorXcd Qp = amplitude_residual(ap, ps);
        const VectorXcd Qm = amplitude_residual(am, ps);
        for (int ss = 0; ss < m; ++ss)
            M(ss, jj) = (Qp(qrow(act[ss])) - Qm(qrow(act[ss]))) / (2.0 * h);
    }

    const Complex akd = alphas(ps.kd);
    if (std::abs(akd) == 0.0) {
        // Q is at least quadratic in alpha, so at the origin the variational
        // matrix vanishes identically: a marginal (all-zero) root set.
        if (M.cwiseAbs().maxCoeff() < 1e-12)
            return std::vector<Complex>(m, Complex(0.0, 0.0));
        throw DegenerateSolutionError(
            "variational matrix is nonzero while the distinguished amplitude "
            "is zero");
    }
    const MatrixXcd B = M / (akd * double(g.leading_mult[ps.kd]));
    return poly_eigenvalues(B);
}

std::vector<Complex> stability_nonspecial(const Eigen::VectorXcd& alphas,
                                          const PreparedSystem& ps,
                                          int group) {
    const auto& g = ps.grouping;
    const int k = static_cast<int>(g.leading.size());
    if (alphas.size() != k)
        throw ShapeError("alpha vector needs one slot per leading eigenvalue");
    if (group < 0 || group >= static_cast<int>(g.nonspecial.size()))
        throw InvalidParameterError("nonspecial group index out of range");
    const std::vector<int>& mem = g.nonspecial[group];
    const int m = static_cast<int>(mem.size());

    const Complex akd = alphas(ps.kd);
    const int n_kd = g.leading_mult[ps.kd];
    if (std::abs(akd) == 0.0)
        throw DegenerateSolutionError(
            "nonspecial exponents undefined at zero distinguished amplitude");
    const Complex P_kd = average_all(alphas, ps)(ps.kd);
    const Complex c = P_kd / (double(n_kd) * g.omega * akd);

    const int d = static_cast<int>(ps.system.A.rows());
    std::vector<std::vector<Polynomial>> dphi;
    dphi.reserve(d);
    for (int r = 0; r < d; ++r) {
        std::vector<Polynomial> row;
        row.reserve(d);
        for (int v = 0; v < d; ++v)
            row.push_back(ps.system.phi[r].derivative(v));
        dphi.push_back(std::move(row));
    }

    std::vector<double> nus(m);
    for (int s = 0; s < m; ++s)
        nus[s] = ps.decomp.lambda(mem[s]).imag() / g.omega;

    // Within a group the offsets nu_j - nu_s are integers, so the averaged
    // coupling matrix below is again a periodic trapezoid average.
    const double period = 2.0 * kPi / g.omega;
    MatrixXcd G = MatrixXcd::Zero(m, m);
    VectorXcd xi(d);
    MatrixXcd D(d, d);
    for (int q = 0; q < ps.nodes; ++q) {
        const double t = period * q / ps.nodes;
        xi.setZero();
        for (int j = 0; j < k; ++j)
            xi(g.leading[j]) =
                alphas(j) * std::polar(1.0, g.leading_mult[j] * g.omega * t);
        const VectorXcd x = ps.decomp.V * xi;
        for (int r = 0; r < d; ++r)
            for (int v = 0; v < d; ++v) D(r, v) = dphi[r][v].eval(x);
        const MatrixXcd W = ps.decomp.Vinv * D * ps.decomp.V;
        for (int s = 0; s < m; ++s)
            for (int j = 0; j < m; ++j)
                G(s, j) += W(mem[s], mem[j]) *
                           std::polar(1.0, (nus[j] - nus[s]) * g.omega * t);
    }
    G /= double(ps.nodes);
    for (int s = 0; s < m; ++s) G(s, s) -= nus[s] * c;

    Eigen::ComplexEigenSolver<MatrixXcd> es(G);
    if (es.info() != Eigen::Success)
        throw NumericError("nonspecial eigensolver failed");
    std::vector<Complex> roots(m);
    for (int i = 0; i < m; ++i) roots[i] = es.eigenvalues()(i);
    return roots;
}

PoincareSolution solve_amplitudes(const PreparedSystem& ps,
                                  const SolveSeed& seed,
                                  const SolveOptions& opts) {
    const auto& g = ps.grouping;
    if (!g.secondary.empty())
        throw SecondaryGroupError(
            "spectrum contains half-integer critical eigenvalues; the "
            "periodic ansatz does not cover them");
    for (int n : g.leading_mult)
        if (std::abs(n) >= 2)
            throw ResonanceWarning("leading multiplier " + std::to_string(n) +
                                   " outside the |n| <= 1 ansatz");
    if (!(seed.r0 > 0))
        throw InvalidParameterError("seed amplitude must be positive");
    if (opts.max_iterations < 1)
        throw InvalidParameterError("max_iterations must be at least 1");

    const int nu = opts.asymmetric ? 3 : 2;
    VectorXd u(nu);
    if (opts.asymmetric)
        u << seed.r0, seed.r0, seed.phi0;
    else
        u << seed.r0, seed.phi0;

    auto alphas_of = [&](const VectorXd& w) {
        return opts.asymmetric ? ansatz_alphas(g, w(0), w(1), w(2))
                               : ansatz_alphas(g, w(0), w(0), w(1));
    };
    auto residual_of = [&](const VectorXd& w) {
        return amplitude_residual(alphas_of(w), ps);
    };
    auto realify = [](const VectorXcd& Q) {
        VectorXd R(2 * Q.size());
        for (int i = 0; i < Q.size(); ++i) {
            R(2 * i) = Q(i).real();
            R(2 * i + 1) = Q(i).imag();
        }
        return R;
    };

    // Gauss-Newton with a central-difference Jacobian. Once the residual is
    // at tolerance the loop keeps polishing until the step settles, which
    // separates genuine roots from slow collapse toward the origin.
    bool res_ok = false;
    int iter = 0;
    while (iter < opts.max_iterations) {
        ++iter;
        const VectorXcd Q = residual_of(u);
        if (Q.size() == 0 || Q.cwiseAbs().maxCoeff() < kResidualTol)
            res_ok = true;
        const VectorXd R = realify(Q);
        Eigen::MatrixXd J(R.size(), nu);
        for (int j = 0; j < nu; ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(u(j)));
            VectorXd up = u, um = u;
            up(j) += h;
            um(j) -= h;
            J.col(j) = (realify(residual_of(up)) - realify(residual_of(um))) /
                       (2.0 * h);
        }
        const VectorXd step = J.colPivHouseholderQr().solve(-R);
        u += step;
        if (res_ok && step.cwiseAbs().maxCoeff() <
                          kStepTol * std::max(1.0, u.cwiseAbs().maxCoeff()))
            break;
    }
    if (!res_ok)
        res_ok = residual_of(u).cwiseAbs().maxCoeff() < kResidualTol;
    if (!res_ok)
        throw NoSolutionError(
            "amplitude equations did not converge; no periodic regime found "
            "near the seed");

    double r = 0, phi_raw = 0;
    if (opts.asymmetric) {
        if (std::abs(u(0) - u(1)) > 1e-9)
            throw DegenerateSolutionError(
                "asymmetric branch converged with r1 != r2, outside the "
                "symmetric family");
        r = 0.5 * (u(0) + u(1));
        phi_raw = u(2);
    } else {
        r = u(0);
        phi_raw = u(1);
    }

    if (r <= 0)
        throw TrivialSolutionError("solver landed on the trivial rest state");
    if (r <= kCollapseTol)
        throw NoSolutionError(
            "amplitude collapsed toward the trivial solution; the regime "
            "does not exist at these parameters");

    double phi = std::remainder(phi_raw, 2.0 * kPi);
    if (phi <= -kPi) phi += 2.0 * kPi;

    PoincareSolution sol;
    if (std::abs(phi) < kPhaseTol)
        sol.regime = Regime::InPhase;
    else if (std::abs(std::abs(phi) - kPi) < kPhaseTol)
        sol.regime = Regime::AntiPhase;
    else
        throw DegenerateSolutionError("converged phase difference " +
                                      fmt(phi) + " is neither 0 nor pi");

    sol.r = r;
    sol.phi = phi;
    sol.iterations = iter;
    sol.alphas = ansatz_alphas(g, r, r, phi);
    sol.delta1 = period_correction(sol.alphas, ps);
    sol.period = 2.0 * kPi / g.omega * (1.0 - sol.delta1 * ps.system.mu);
    sol.leading_roots = stability_leading(sol.alphas, ps);
    for (std::size_t gi = 0; gi < g.nonspecial.size(); ++gi) {
        const auto roots =
            stability_nonspecial(sol.alphas, ps, static_cast<int>(gi));
        sol.nonspecial_roots.insert(sol.nonspecial_roots.end(), roots.begin(),
                                    roots.end());
    }
    sol.stable = true;
    for (const Complex& z : sol.leading_roots)
        if (!(z.real() < -kRootTol)) sol.stable = false;
    for (const Complex& z : sol.nonspecial_roots)
        if (!(z.real() < -kRootTol)) sol.stable = false;
    return sol;
}

std::vector<RegimePrediction> closed_form_regimes(
    const params::PoincareParams& p, dynamics::Model model) {
    using dynamics::Model;
    using Source = RegimePrediction::Source;
    p.validate();
    const double g2 = p.gamma * p.gamma;
    auto entry = [&](Regime reg, Source src, bool exists, double r,
                     double delta1, std::optional<bool> stable) {
        RegimePrediction out;
        out.regime = reg;
        out.source = src;
        out.exists = exists;
        out.stable = stable;
        if (exists) {
            out.amplitude = 2.0 * r;
            out.delta1 = delta1;
            out.period = 2.0 * kPi * (1.0 - delta1 * p.mu);
        }
        return out;
    };

    std::vector<RegimePrediction> out;
    switch (model) {
        case Model::SmallSigma: {
            if (std::abs(1.0 - p.omega * p.omega) < 1e-12)
                throw InvalidParameterError(
                    "in-phase period correction is singular at omega = 1");
            const bool exists = p.gamma > 0 && p.a > 0;
            const bool stable = p.sigma > 0 && p.a > 0;
            const double d_in = (1.0 + g2) / (1.0 - p.omega * p.omega);
            out.push_back(entry(Regime::InPhase, Source::Theorem2, exists,
                                p.gamma, d_in, stable));
            out.push_back(entry(Regime::AntiPhase, Source::Theorem2, exists,
                                p.gamma, 0.0, stable));
            break;
        }
        case Model::ThreeDofSigma: {
            if (!(p.sigma > 0))
                throw InvalidParameterError(
                    "three-dof closed forms need sigma > 0");
            if (!(p.a > 0))
                throw InvalidParameterError("three-dof closed forms need a > 0");
            const double st = params::sigma_tilde(p);
            const double om2 = p.omega * p.omega;
            const bool in_exists = p.gamma > 0 && st < g2 / 2.0;
            double r_in = 0, d_in = 0;
            std::optional<bool> in_stable = false;
            if (in_exists) {
                r_in = std::sqrt((g2 - 2.0 * st) / (1.0 + 2.0 * st));
                d_in = (1.0 - om2) * (1.0 + g2) /
                       ((1.0 - om2) * (1.0 - om2) + 2.0 * p.sigma / p.a +
                        p.sigma * p.sigma);
                in_stable = st < g2 / (2.0 * (2.0 + g2)) &&
                            1.0 + 2.0 * p.a * p.sigma * st +
                                    g2 * (1.0 - p.a * p.sigma) >
                                0;
            }
            out.push_back(entry(Regime::InPhase, Source::Theorem3, in_exists,
                                r_in, d_in, in_stable));
            out.push_back(entry(Regime::AntiPhase, Source::Theorem3,
                                p.gamma > 0, p.gamma, 0.0, true));
            break;
        }
        case Model::TwoMass: {
            if (!p.kappa)
                throw InvalidParameterError("two-mass closed forms need kappa");
            if (!(p.sigma > 0))
                throw InvalidParameterError(
                    "two-mass closed forms need sigma > 0");
            if (!(p.a > 0))
                throw InvalidParameterError("two-mass closed forms need a > 0");
            const double tm = 2.0 * (*p.kappa) - 1.0;
            const double s_in = p.sigma / (p.a * (1.0 + p.sigma * p.sigma));
            const double s_an =
                p.sigma / (p.a * (tm * tm + p.sigma * p.sigma));
            const double d_in =
                (1.0 + g2) /
                (2.0 * (1.0 + p.sigma / p.a + p.sigma * p.sigma));
            const double d_an =
                -tm * (1.0 + g2) /
                (2.0 * (tm * tm + p.sigma / p.a + p.sigma * p.sigma));
            auto branch = [&](Regime reg, double sx, double d1) {
                const bool exists = p.gamma > 0 && g2 > sx;
                const double r =
                    exists ? std::sqrt((g2 - sx) / (1.0 + sx)) : 0.0;
                return entry(reg, Source::Theorem4, exists, r, d1,
                             std::nullopt);
            };
            out.push_back(branch(Regime::InPhase, s_in, d_in));
            out.push_back(branch(Regime::AntiPhase, s_an, d_an));
            break;
        }
        default:
            throw InvalidParameterError(
                "closed-form regime predictions exist for the small-parameter "
                "models only");
    }
    return out;
}

const char* to_string(Regime r) {
    return r == Regime::InPhase ? "in-phase" : "anti-phase";
}

const char* to_string(RegimePrediction::Source s) {
    switch (s) {
        case RegimePrediction::Source::Theorem2: return "Theorem2";
        case RegimePrediction::Source::Theorem3: return "Theorem3";
        default: return "Theorem4";
    }
}

}  // namespace huygens::poincare
