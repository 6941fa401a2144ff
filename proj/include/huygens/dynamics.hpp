#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <numbers>
#include <variant>
#include <vector>

#include "huygens/errors.hpp"
#include "huygens/params.hpp"

namespace huygens::dynamics {

// FullNonlinear, Dimensionless and Linear integrate the frame-coupled
// equations in dimensionless form and take DimensionlessParams. The last
// three are the small-parameter models x' = A x + mu * Phi(x) and take
// PoincareParams. TwoMass additionally needs kappa and carries two frame
// coordinates.
enum class Model {
    FullNonlinear,
    Dimensionless,
    Linear,
    SmallSigma,
    ThreeDofSigma,
    TwoMass,
};

using State = Eigen::VectorXd;
using ModelParams =
    std::variant<params::DimensionlessParams, params::PoincareParams>;

// State layout: (theta1, dtheta1, ..., thetan, dthetan, y, dy), and for
// TwoMass (theta1, dtheta1, theta2, dtheta2, y1, dy1, y2, dy2).
int state_dim(Model model, const ModelParams& p);

State rhs(Model model, const State& x, const ModelParams& p);

struct IntegrateOptions {
    double sample_interval = 2.0 * std::numbers::pi / 200.0;
    long max_steps = 20'000'000;
    // > 0 switches off step control and marches with this exact step; the
    // final step is shortened to land on t_end.
    double fixed_step = 0;
};

struct Trajectory {
    Model model = Model::Dimensionless;
    int n = 2;  // pendulum count
    std::vector<double> t;
    std::vector<State> x;

    std::size_t size() const { return t.size(); }
    int dim() const { return x.empty() ? 0 : static_cast<int>(x.front().size()); }
};

Trajectory integrate(Model model, const State& x0, const ModelParams& p,
                     double t_end, double tol = 1e-9,
                     const IntegrateOptions& opts = {});

// Removes the neutral rigid-body component of the TwoMass frame pair so the
// trajectory starts on the invariant subspace of the oscillatory modes.
// Requires sigma > 0.
void project_rigid_body(State& x, const params::PoincareParams& p);

// Header t,theta1,dtheta1,theta2,dtheta2,y,dy (plus ,y2,dy2 for TwoMass),
// rows in %.16e.
void write_csv(std::ostream& out, const Trajectory& traj);

}  // namespace huygens::dynamics
