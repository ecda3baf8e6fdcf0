#include "rpc/plant.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rpc/errors.hpp"

namespace rpc {

void BicycleParams::validate() const {
  if (l_r <= 0.0) throw ConfigError("plant.l_r: must be positive");
  if (wheelbase <= 0.0) throw ConfigError("plant.wheelbase: must be positive");
  if (mu <= 0.0) throw ConfigError("plant.mu: must be positive");
  if (g <= 0.0) throw ConfigError("plant.g: must be positive");
  if (a_max <= 0.0) throw ConfigError("plant.a_max: must be positive");
}

double terrain_rc(const TerrainMap& map, double x, double /*y*/) {
  for (const auto& band : map.bands) {
    if (x >= band.x_min && x <= band.x_max) return band.r_c;
  }
  return map.default_r_c;
}

Eigen::Vector4d bicycle_rhs(const Eigen::Vector4d& state, const Eigen::Vector2d& u,
                            const BicycleParams& params, double r_c) {
  const double theta = state[0];
  const double v = state[1];
  Eigen::Vector4d dx;
  dx[0] = (v / params.l_r) * std::tan(u[1]);
  dx[1] = std::min(u[0], params.mu * params.g) - r_c * params.g;
  dx[2] = v * std::cos(theta);
  dx[3] = v * std::sin(theta);
  return dx;
}

Eigen::Vector4d reduced_rhs(const Eigen::Vector4d& state, const Eigen::Vector2d& u,
                            const BicycleParams& params) {
  const double theta = state[0];
  const double v = state[1];
  Eigen::Vector4d dx;
  dx[0] = (v / params.l_r) * u[1];
  dx[1] = u[0];
  dx[2] = v;
  dx[3] = v * theta;
  return dx;
}

namespace {

void format_g9(std::string& row, double value, bool first) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  if (!first) row += ',';
  row += buf;
}

int piece_steps(double duration, double h) {
  const double steps = duration / h;
  const long long k = std::llround(steps);
  if (k < 1 || std::abs(static_cast<double>(k) * h - duration) > 1e-9) {
    throw StepMismatchError("integrate: step does not tile a control piece of duration " +
                            std::to_string(duration));
  }
  return static_cast<int>(k);
}

}  // namespace

void TrajectoryLog::write_csv(std::ostream& out) const {
  out << "t,theta,v,x,y,u1,u2\n";
  for (const auto& s : samples) {
    if (s.state.size() != 4 || s.u.size() != 2) {
      throw DimensionMismatchError("TrajectoryLog: csv rows require 4 states and 2 inputs");
    }
    std::string row;
    format_g9(row, s.t, true);
    for (int i = 0; i < 4; ++i) format_g9(row, s.state[i], false);
    for (int i = 0; i < 2; ++i) format_g9(row, s.u[i], false);
    row += '\n';
    out << row;
  }
}

void TrajectoryLog::write_csv_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("TrajectoryLog: cannot open " + path + " for writing");
  write_csv(out);
}

TrajectoryLog TrajectoryLog::read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingLogError("TrajectoryLog: cannot open " + path);
  TrajectoryLog log;
  log.actuated_dim = 2;
  std::string line;
  if (!std::getline(in, line)) return log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Sample s;
    s.state.resize(4);
    s.u.resize(2);
    double cols[7];
    for (int i = 0; i < 7; ++i) {
      if (!std::getline(ss, cell, ',')) {
        throw MissingLogError("TrajectoryLog: malformed row in " + path);
      }
      cols[i] = std::stod(cell);
    }
    s.t = cols[0];
    for (int i = 0; i < 4; ++i) s.state[i] = cols[1 + i];
    for (int i = 0; i < 2; ++i) s.u[i] = cols[5 + i];
    log.samples.push_back(std::move(s));
  }
  return log;
}

Eigen::VectorXd rk4_step(const VectorField& rhs, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double h) {
  const Eigen::VectorXd k1 = rhs(x, u);
  const Eigen::VectorXd k2 = rhs(x + 0.5 * h * k1, u);
  const Eigen::VectorXd k3 = rhs(x + 0.5 * h * k2, u);
  const Eigen::VectorXd k4 = rhs(x + h * k3, u);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

TrajectoryLog integrate(const VectorField& rhs, const Eigen::VectorXd& x0, int m,
                        const PiecewiseControl& control, double h, double t0) {
  TrajectoryLog log;
  log.actuated_dim = m;
  Eigen::VectorXd x = x0;
  double t = t0;
  if (!control.empty()) {
    log.samples.push_back({t, x, control.front().u});
  }
  for (const auto& piece : control) {
    const int steps = piece_steps(piece.duration, h);
    for (int i = 0; i < steps; ++i) {
      x = rk4_step(rhs, x, piece.u, h);
      t += h;
      log.samples.push_back({t, x, piece.u});
    }
  }
  return log;
}

BicyclePlant::BicyclePlant(const Eigen::Vector4d& state0, BicycleParams params,
                           TerrainMap terrain, double h)
    : params_(std::move(params)), terrain_(std::move(terrain)), h_(h),
      state_(state0, 2) {
  params_.validate();
  log_.actuated_dim = 2;
  log_.samples.push_back({0.0, state0, Eigen::Vector2d::Zero()});
}

bool BicyclePlant::apply(const ControlInput& u, double dt) {
  if (u.dim() != 2) throw DimensionMismatchError("BicyclePlant: input must have 2 channels");
  if (breach_) return false;
  const int steps = piece_steps(dt, h_);
  // Admissible command -> physical input; the acceleration channel scales.
  const Eigen::Vector2d phys(params_.a_max * u.u[0], u.u[1]);
  const VectorField rhs = [this](const Eigen::VectorXd& x, const Eigen::VectorXd& uu) {
    const double rc = terrain_rc(terrain_, x[2], x[3]);
    return Eigen::VectorXd(bicycle_rhs(x, uu, params_, rc));
  };
  Eigen::VectorXd x = state_.full();
  for (int i = 0; i < steps; ++i) {
    x = rk4_step(rhs, x, phys, h_);
    t_ += h_;
    log_.samples.push_back({t_, x, u.u});
    state_ = PartitionedState(x, 2);
    if (monitor_) {
      if (auto reason = monitor_(t_, state_)) {
        breach_ = SafetyBreach{t_, *reason};
        log_.mark(t_, "breach: " + *reason);
        return false;
      }
    }
  }
  return true;
}

AffinePlant::AffinePlant(const Eigen::VectorXd& state0, Eigen::VectorXd drift,
                         Eigen::MatrixXd gain, double h)
    : drift_(std::move(drift)), gain_(std::move(gain)), h_(h),
      state_(state0, static_cast<int>(state0.size())) {
  if (drift_.size() != state0.size() || gain_.rows() != state0.size()) {
    throw DimensionMismatchError("AffinePlant: drift/gain shape mismatch");
  }
  log_.actuated_dim = state_.actuated_dim();
  log_.samples.push_back({0.0, state0, Eigen::VectorXd::Zero(gain_.cols())});
}

bool AffinePlant::apply(const ControlInput& u, double dt) {
  if (u.dim() != input_dim()) throw DimensionMismatchError("AffinePlant: input dim mismatch");
  const int steps = piece_steps(dt, h_);
  const VectorField rhs = [this](const Eigen::VectorXd&, const Eigen::VectorXd& uu) {
    return Eigen::VectorXd(drift_ + gain_ * uu);
  };
  Eigen::VectorXd x = state_.full();
  for (int i = 0; i < steps; ++i) {
    x = rk4_step(rhs, x, u.u, h_);
    t_ += h_;
    log_.samples.push_back({t_, x, u.u});
  }
  state_ = PartitionedState(x, state_.actuated_dim());
  return true;
}

}  // namespace rpc
