#include "polybound/model.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "polybound/error.hpp"

namespace polybound {

BoltzmannMachine::BoltzmannMachine(Eigen::MatrixXd weights, Eigen::VectorXd thresholds)
    : weights_(std::move(weights)), thresholds_(std::move(thresholds)) {
  const auto n = thresholds_.size();
  if (weights_.rows() != n || weights_.cols() != n) {
    throw Error(ErrorCode::InvalidParameter, "weight matrix must be N x N with N = len(theta)");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(thresholds_(i))) throw Error(ErrorCode::InvalidParameter, "non-finite threshold");
    if (weights_(i, i) != 0.0) throw Error(ErrorCode::InvalidParameter, "weight diagonal must be zero");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!std::isfinite(weights_(i, j))) throw Error(ErrorCode::InvalidParameter, "non-finite weight");
      if (weights_(i, j) != weights_(j, i)) throw Error(ErrorCode::InvalidParameter, "weights must be symmetric");
    }
  }
}

BoltzmannMachine BoltzmannMachine::with_weight(int i, int j, double value) const {
  if (i == j) throw Error(ErrorCode::InvalidIndex, "cannot set a diagonal weight");
  Eigen::MatrixXd w = weights_;
  w(i, j) = value;
  w(j, i) = value;
  return BoltzmannMachine(std::move(w), thresholds_);
}

BoltzmannMachine BoltzmannMachine::scaled_weights(double factor) const {
  return BoltzmannMachine(weights_ * factor, thresholds_);
}

BoltzmannMachine BoltzmannMachine::permuted(std::span<const int> perm) const {
  const int n = size();
  Eigen::MatrixXd w(n, n);
  Eigen::VectorXd t(n);
  for (int i = 0; i < n; ++i) {
    t(perm[i]) = thresholds_(i);
    for (int j = 0; j < n; ++j) w(perm[i], perm[j]) = weights_(i, j);
  }
  return BoltzmannMachine(std::move(w), std::move(t));
}

double BoltzmannMachine::energy(std::span<const int> spins) const {
  double e = 0.0;
  for (int i = 0; i < size(); ++i) {
    e += thresholds_(i) * spins[i];
    for (int j = i + 1; j < size(); ++j) e += weights_(i, j) * spins[i] * spins[j];
  }
  return e;
}

BoltzmannMachine sk_random(int n, double sigma_w, double sigma_theta, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "network needs at least one unit");
  if (!(sigma_w >= 0.0) || !(sigma_theta >= 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "standard deviations must be non-negative");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd theta(n);
  for (int i = 0; i < n; ++i) theta(i) = sigma_theta * normal(rng);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  const double scale = sigma_w / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      w(i, j) = scale * normal(rng);
      w(j, i) = w(i, j);
    }
  }
  return BoltzmannMachine(std::move(w), std::move(theta));
}

const char* to_string(MeanFieldStart start) {
  return start == MeanFieldStart::Zero ? "zero" : "standard";
}

MeanFieldStart parse_mean_field_start(const std::string& name) {
  if (name == "standard") return MeanFieldStart::Standard;
  if (name == "zero") return MeanFieldStart::Zero;
  throw Error(ErrorCode::Configuration, "unknown mean-field start '" + name + "' (standard|zero)");
}

// ---------------------------------------------------------------------------
// Single-unit moments

namespace {

// Same as raw_moments/corrected_moments but accepting |m| = 1, where every
// moment of order >= 1 vanishes. tanh saturates to exactly +-1 for large
// fields and the tables must still be usable there.
std::vector<double> raw_moments_unchecked(double m, int c_max) {
  std::vector<double> raw(static_cast<std::size_t>(c_max) + 1);
  const double p_up = 0.5 * (1.0 + m);
  const double p_down = 0.5 * (1.0 - m);
  double up = 1.0;      // (1 - m)^c
  double down = 1.0;    // (-1 - m)^c
  for (int c = 0; c <= c_max; ++c) {
    raw[static_cast<std::size_t>(c)] = p_up * up + p_down * down;
    up *= 1.0 - m;
    down *= -1.0 - m;
  }
  raw[0] = 1.0;
  if (c_max >= 1) raw[1] = 0.0;
  return raw;
}

std::vector<double> corrected_moments_unchecked(double m, int c_max) {
  const auto raw = raw_moments_unchecked(m, c_max);
  // Moment-to-cumulant recursion:
  //   k_c = M_c - sum_{j=1}^{c-1} binom(c-1, j-1) k_j M_{c-j}
  std::vector<double> k(static_cast<std::size_t>(c_max) + 1, 0.0);
  for (int c = 1; c <= c_max; ++c) {
    double acc = raw[static_cast<std::size_t>(c)];
    double binom = 1.0;  // binom(c-1, j-1)
    for (int j = 1; j < c; ++j) {
      acc -= binom * k[static_cast<std::size_t>(j)] * raw[static_cast<std::size_t>(c - j)];
      binom = binom * static_cast<double>(c - j) / static_cast<double>(j);
    }
    k[static_cast<std::size_t>(c)] = acc;
  }
  k[0] = 0.0;
  if (c_max >= 1) k[1] = 0.0;
  return k;
}

void check_magnetization(double m) {
  if (!(std::abs(m) < 1.0)) {
    throw Error(ErrorCode::InvalidMagnetization, "magnetization must satisfy |m| < 1, got " + std::to_string(m));
  }
}

}  // namespace

std::vector<double> raw_moments(double m, int c_max) {
  check_magnetization(m);
  if (c_max < 0) throw Error(ErrorCode::InvalidParameter, "negative moment degree");
  return raw_moments_unchecked(m, c_max);
}

std::vector<double> corrected_moments(double m, int c_max) {
  check_magnetization(m);
  if (c_max < 1) throw Error(ErrorCode::InvalidParameter, "moment degree must be >= 1");
  return corrected_moments_unchecked(m, c_max);
}

// ---------------------------------------------------------------------------
// Mean field

namespace {

double fixed_point_residual(const BoltzmannMachine& bm, const Eigen::VectorXd& h,
                            const Eigen::VectorXd& m) {
  if (h.size() == 0) return 0.0;
  return (h - bm.thresholds() - bm.weights() * m).cwiseAbs().maxCoeff();
}

}  // namespace

MeanFieldState make_mean_field_state(const BoltzmannMachine& bm, const Eigen::VectorXd& h,
                                     const MeanFieldOptions& opts) {
  if (h.size() != bm.size()) throw Error(ErrorCode::InvalidParameter, "field vector has the wrong length");
  MeanFieldState st;
  st.h = h;
  st.m = h.array().tanh().matrix();
  st.residual = fixed_point_residual(bm, st.h, st.m);
  st.converged = st.residual <= opts.tol;
  st.moments_table.reserve(static_cast<std::size_t>(bm.size()));
  for (int i = 0; i < bm.size(); ++i) {
    st.moments_table.push_back(corrected_moments_unchecked(st.m(i), opts.moment_degree));
  }
  return st;
}

MeanFieldState solve_mean_field(const BoltzmannMachine& bm, const Eigen::VectorXd& init,
                                const MeanFieldOptions& opts) {
  if (!(opts.tol > 0.0)) throw Error(ErrorCode::InvalidParameter, "tolerance must be positive");
  if (!(opts.damping >= 0.0 && opts.damping < 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "damping must lie in [0, 1)");
  }
  if (init.size() != bm.size()) throw Error(ErrorCode::InvalidParameter, "initial fields have the wrong length");

  Eigen::VectorXd h = init;
  Eigen::VectorXd m = h.array().tanh().matrix();
  double residual = fixed_point_residual(bm, h, m);
  int iter = 0;
  while (residual > opts.tol && iter < opts.max_iter) {
    const Eigen::VectorXd target = bm.thresholds() + bm.weights() * m;
    h = opts.damping * h + (1.0 - opts.damping) * target;
    m = h.array().tanh().matrix();
    residual = fixed_point_residual(bm, h, m);
    ++iter;
  }
  // A few Newton steps take a converged fixed point down to rounding level.
  if (residual <= opts.tol) {
    const Eigen::Index n = bm.size();
    for (int step = 0; step < 3 && residual > 0.0; ++step) {
      const Eigen::VectorXd f = bm.thresholds() + bm.weights() * m - h;
      const Eigen::VectorXd d = (1.0 - m.array().square()).matrix();
      const Eigen::MatrixXd jac = bm.weights() * d.asDiagonal() - Eigen::MatrixXd::Identity(n, n);
      const Eigen::VectorXd h_new = h - jac.partialPivLu().solve(f);
      const Eigen::VectorXd m_new = h_new.array().tanh().matrix();
      const double r_new = fixed_point_residual(bm, h_new, m_new);
      if (!(r_new < residual)) break;
      h = h_new;
      m = m_new;
      residual = r_new;
    }
  }
  MeanFieldState st = make_mean_field_state(bm, h, opts);
  st.iterations = iter;
  return st;
}

MeanFieldState solve_mean_field(const BoltzmannMachine& bm, MeanFieldStart start,
                                const MeanFieldOptions& opts) {
  const Eigen::VectorXd init =
      start == MeanFieldStart::Zero ? Eigen::VectorXd::Zero(bm.size()) : bm.thresholds();
  return solve_mean_field(bm, init, opts);
}

double centering_constant(const MeanFieldState& state, const BoltzmannMachine& bm) {
  return 0.5 * state.m.dot(bm.weights() * state.m) + (bm.thresholds() - state.h).dot(state.m);
}

double log_z_tilde(const MeanFieldState& state, const BoltzmannMachine& bm) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < state.h.size(); ++i) {
    const double a = std::abs(state.h(i));
    acc += a + std::log1p(std::exp(-2.0 * a));
  }
  return acc + centering_constant(state, bm);
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

void check_enumerable(const BoltzmannMachine& bm) {
  if (bm.size() > kMaxEnumerationUnits) {
    throw Error(ErrorCode::TooLarge,
                "exact enumeration refused for N = " + std::to_string(bm.size()) +
                    " > " + std::to_string(kMaxEnumerationUnits) + "; use the lower bounds instead");
  }
}

// Visits all 2^N spin states in Gray-code order. `visit(k)` is called after
// unit k flipped (k = -1 for the initial all-down state).
template <typename Visit>
void gray_walk(int n, Visit&& visit) {
  visit(-1);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t step = 1; step < total; ++step) {
    visit(__builtin_ctzll(step));
  }
}

// Kahan-compensated accumulator that can be rescaled for log-sum-exp.
struct Compensated {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  void scale(double f) {
    sum *= f;
    carry *= f;
  }
};

// Streams exp(E - max) for every state, with `extra(state_index)` weights
// accumulated alongside.
struct EnergyWalker {
  const BoltzmannMachine& bm;
  std::vector<int> s;
  Eigen::VectorXd field;  // theta_i + sum_j w_ij s_j
  double energy = 0.0;

  explicit EnergyWalker(const BoltzmannMachine& b)
      : bm(b), s(static_cast<std::size_t>(b.size()), -1) {
    field = bm.thresholds() - bm.weights() * Eigen::VectorXd::Ones(bm.size());
    energy = bm.energy(s);
  }

  void flip(int k) {
    const int old = s[static_cast<std::size_t>(k)];
    energy -= 2.0 * old * field(k);
    s[static_cast<std::size_t>(k)] = -old;
    field -= 2.0 * old * bm.weights().col(k);
  }
};

}  // namespace

double exact_log_partition(const BoltzmannMachine& bm) {
  check_enumerable(bm);
  EnergyWalker walker(bm);
  double max_e = -std::numeric_limits<double>::infinity();
  Compensated acc;
  gray_walk(bm.size(), [&](int k) {
    if (k >= 0) walker.flip(k);
    const double e = walker.energy;
    if (e > max_e) {
      if (std::isfinite(max_e)) acc.scale(std::exp(max_e - e));
      max_e = e;
    }
    acc.add(std::exp(e - max_e));
  });
  return max_e + std::log(acc.sum);
}

double exact_correlation(const BoltzmannMachine& bm, int i, int j) {
  check_enumerable(bm);
  if (i < 0 || j < 0 || i >= bm.size() || j >= bm.size()) {
    throw Error(ErrorCode::InvalidIndex, "unit index out of range");
  }
  if (i == j) return 1.0;
  EnergyWalker walker(bm);
  double max_e = -std::numeric_limits<double>::infinity();
  Compensated z, zc;
  gray_walk(bm.size(), [&](int k) {
    if (k >= 0) walker.flip(k);
    const double e = walker.energy;
    if (e > max_e) {
      if (std::isfinite(max_e)) {
        const double f = std::exp(max_e - e);
        z.scale(f);
        zc.scale(f);
      }
      max_e = e;
    }
    const double p = std::exp(e - max_e);
    z.add(p);
    zc.add(p * walker.s[static_cast<std::size_t>(i)] * walker.s[static_cast<std::size_t>(j)]);
  });
  return zc.sum / z.sum;
}

namespace {

// <(sum_{i<j} w_ij x_i x_j + sum_i r_i x_i)^n> with x_i = s_i - m_i under
// p(s_i) = (1 + s_i m_i) / 2.
MomentVector enumerate_moments(const BoltzmannMachine& bm, std::span<const double> m,
                               const Eigen::VectorXd& linear, int n_max) {
  check_enumerable(bm);
  if (n_max < 0) throw Error(ErrorCode::InvalidParameter, "negative moment order");
  const int n = bm.size();
  const auto& w = bm.weights();

  std::vector<int> s(static_cast<std::size_t>(n), -1);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = -1.0 - m[i];
  Eigen::VectorXd coupled = w * x;  // sum_j w_ij x_j
  double dh = 0.5 * x.dot(coupled) + linear.dot(x);

  std::vector<Compensated> acc(static_cast<std::size_t>(n_max) + 1);
  gray_walk(n, [&](int k) {
    if (k >= 0) {
      const double delta = -2.0 * s[static_cast<std::size_t>(k)];
      s[static_cast<std::size_t>(k)] = -s[static_cast<std::size_t>(k)];
      dh += delta * (coupled(k) + linear(k));
      x(k) += delta;
      coupled += delta * w.col(k);
    }
    double p = 1.0;
    for (int i = 0; i < n; ++i) p *= 0.5 * (1.0 + s[static_cast<std::size_t>(i)] * m[i]);
    double term = p;
    for (int d = 0; d <= n_max; ++d) {
      acc[static_cast<std::size_t>(d)].add(term);
      term *= dh;
    }
  });

  MomentVector out;
  out.values.resize(static_cast<std::size_t>(n_max) + 1);
  for (int d = 0; d <= n_max; ++d) out.values[static_cast<std::size_t>(d)] = acc[static_cast<std::size_t>(d)].sum;
  out.values[0] = 1.0;
  return out;
}

}  // namespace

MomentVector brute_force_delta_h_moments(const BoltzmannMachine& bm, const MeanFieldState& state,
                                         int n_max) {
  // dH = 1/2 sum_ij w_ij x_i x_j + sum_i r_i x_i with r the mean-field
  // residual theta + W m - h; constants cancel because <dH> = 0.
  const Eigen::VectorXd r = bm.thresholds() + bm.weights() * state.m - state.h;
  std::vector<double> m(state.m.data(), state.m.data() + state.m.size());
  MomentVector out = enumerate_moments(bm, m, r, n_max);
  return out;
}

MomentVector brute_force_coupling_moments(const BoltzmannMachine& bm, std::span<const double> m,
                                          int n_max) {
  if (static_cast<int>(m.size()) != bm.size()) {
    throw Error(ErrorCode::InvalidParameter, "magnetization vector has the wrong length");
  }
  return enumerate_moments(bm, m, Eigen::VectorXd::Zero(bm.size()), n_max);
}

}  // namespace polybound
