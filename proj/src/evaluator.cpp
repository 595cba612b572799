#include "polybound/evaluator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "polybound/error.hpp"

namespace polybound {

namespace {

constexpr std::size_t kMaxFactorVars = 8;
constexpr std::size_t kMaxFactors = 64;

// Dense factor over graph nodes. data is row-major with vars[0] most
// significant; every variable ranges over 0..N-1. The storage belongs to the
// evaluator's caches or scratch buffers.
struct Factor {
  std::array<int, kMaxFactorVars> vars{};
  std::size_t arity = 0;
  const double* data = nullptr;

  bool has(int v) const { return std::find(vars.begin(), vars.begin() + arity, v) != vars.begin() + arity; }
};

// Neumaier summation.
struct Accumulator {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMatrix>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

}  // namespace

struct GraphEvaluator::Workspace {
  std::vector<std::vector<double>> outputs;
  std::vector<double> d;
  std::vector<double> side[2];
  std::vector<double> tmp;
};

namespace {

std::vector<double>& sized(std::vector<double>& buf, std::size_t size) {
  buf.resize(size);
  return buf;
}

// Elimination where every touching factor has at most one variable besides
// v: out[a,b] = sum_v d[v] A[v,a] B[v,b] as a matrix product. Returns false
// when the pattern does not apply.
bool eliminate_pairwise(std::span<const Factor> touching, int v, int n, const Factor& shape,
                        GraphEvaluator::Workspace& ws, std::vector<double>& out) {
  if (shape.arity > 2) return false;
  for (const auto& f : touching) {
    if (f.arity > 2) return false;
  }
  const auto un = static_cast<std::size_t>(n);
  auto& d = sized(ws.d, un);
  std::fill(d.begin(), d.end(), 1.0);
  // side[k] = elementwise product of the (v, out_k) factors, indexed [v][out_k].
  const double* single[2] = {nullptr, nullptr};
  bool single_transposed[2] = {false, false};
  int count[2] = {0, 0};
  for (const auto& f : touching) {
    if (f.arity == 1) {
      for (std::size_t x = 0; x < un; ++x) d[x] *= f.data[x];
      continue;
    }
    const bool v_first = f.vars[0] == v;
    const int other = v_first ? f.vars[1] : f.vars[0];
    const std::size_t k = shape.vars[0] == other ? 0 : 1;
    if (count[k] == 0) {
      single[k] = f.data;
      single_transposed[k] = !v_first;
    } else {
      if (count[k] == 1) {
        auto& buf = sized(ws.side[k], un * un);
        RowMap(buf.data(), n, n) = single_transposed[k] ? RowMatrix(ConstRowMap(single[k], n, n).transpose())
                                                        : RowMatrix(ConstRowMap(single[k], n, n));
        single[k] = buf.data();
        single_transposed[k] = false;
      }
      RowMap acc(ws.side[k].data(), n, n);
      if (v_first) {
        acc.array() *= ConstRowMap(f.data, n, n).array();
      } else {
        acc.array() *= ConstRowMap(f.data, n, n).transpose().array();
      }
    }
    ++count[k];
  }
  const Eigen::Map<const Eigen::VectorXd> dv(d.data(), n);
  if (shape.arity == 0) {
    sized(out, 1)[0] = dv.sum();
  } else if (shape.arity == 1) {
    Eigen::Map<Eigen::VectorXd> o(sized(out, un).data(), n);
    if (single_transposed[0]) {
      o.noalias() = ConstRowMap(single[0], n, n) * dv;
    } else {
      o.noalias() = ConstRowMap(single[0], n, n).transpose() * dv;
    }
  } else {
    // tmp = diag(d) * B with B indexed [v][b].
    RowMap tmp(sized(ws.tmp, un * un).data(), n, n);
    if (single_transposed[1]) {
      tmp.noalias() = dv.asDiagonal() * ConstRowMap(single[1], n, n).transpose();
    } else {
      tmp.noalias() = dv.asDiagonal() * ConstRowMap(single[1], n, n);
    }
    RowMap o(sized(out, un * un).data(), n, n);
    if (single_transposed[0]) {
      o.noalias() = ConstRowMap(single[0], n, n) * tmp;
    } else {
      o.noalias() = ConstRowMap(single[0], n, n).transpose() * tmp;
    }
  }
  return true;
}

// Multiplies every factor that mentions `v` and sums `v` out into `out`.
// Touching factors are removed from `factors`; the result is returned with
// its data pointing into `out`.
Factor eliminate(std::vector<Factor>& factors, int v, int n, GraphEvaluator::Workspace& ws,
                 std::vector<double>& out) {
  std::array<Factor, kMaxFactors> touching_buf;
  std::size_t nf = 0;
  for (std::size_t i = 0; i < factors.size();) {
    if (factors[i].has(v)) {
      touching_buf[nf++] = factors[i];
      factors[i] = factors.back();
      factors.pop_back();
    } else {
      ++i;
    }
  }
  const std::span<const Factor> touching(touching_buf.data(), nf);

  Factor shape;
  for (const auto& f : touching) {
    for (std::size_t p = 0; p < f.arity; ++p) {
      const int u = f.vars[p];
      if (u == v || shape.has(u)) continue;
      if (shape.arity == kMaxFactorVars) {
        throw Error(ErrorCode::Configuration, "elimination order creates a factor that is too wide");
      }
      shape.vars[shape.arity++] = u;
    }
  }
  std::sort(shape.vars.begin(), shape.vars.begin() + shape.arity);

  if (!eliminate_pairwise(touching, v, n, shape, ws, out)) {
    const std::size_t arity = shape.arity;
    const auto un = static_cast<std::size_t>(n);
    // strides[f][k]: stride of shape.vars[k] in factor f (0 if absent);
    // v_stride[f]: stride of v in factor f.
    std::array<std::array<std::size_t, kMaxFactorVars>, kMaxFactors> strides{};
    std::array<std::size_t, kMaxFactors> v_stride{};
    for (std::size_t f = 0; f < nf; ++f) {
      const auto& fac = touching[f];
      std::size_t stride = 1;
      for (std::size_t p = fac.arity; p-- > 0;) {
        if (fac.vars[p] == v) {
          v_stride[f] = stride;
        } else {
          const auto k = static_cast<std::size_t>(
              std::lower_bound(shape.vars.begin(), shape.vars.begin() + arity, fac.vars[p]) - shape.vars.begin());
          strides[f][k] = stride;
        }
        stride *= un;
      }
    }

    std::size_t out_size = 1;
    for (std::size_t k = 0; k < arity; ++k) out_size *= un;
    sized(out, out_size);

    std::array<std::size_t, kMaxFactorVars> digit{};
    std::array<const double*, kMaxFactors> ptr{};
    for (std::size_t cell = 0; cell < out_size; ++cell) {
      for (std::size_t f = 0; f < nf; ++f) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < arity; ++k) off += digit[k] * strides[f][k];
        ptr[f] = touching[f].data + off;
      }
      double acc = 0.0;
      for (std::size_t x = 0; x < un; ++x) {
        double prod = ptr[0][x * v_stride[0]];
        for (std::size_t f = 1; f < nf; ++f) prod *= ptr[f][x * v_stride[f]];
        acc += prod;
      }
      out[cell] = acc;
      for (std::size_t k = arity; k-- > 0;) {
        if (++digit[k] < un) break;
        digit[k] = 0;
      }
    }
  }
  shape.data = out.data();
  return shape;
}

}  // namespace

GraphEvaluator::GraphEvaluator(const Eigen::MatrixXd& weights,
                               std::vector<std::vector<double>> node_moments)
    : n_(static_cast<int>(weights.rows())),
      weights_(weights),
      node_moments_(std::move(node_moments)) {
  if (static_cast<int>(node_moments_.size()) != n_) {
    throw Error(ErrorCode::Configuration, "one corrected-moment table per unit is required");
  }
}

GraphEvaluator::GraphEvaluator(const BoltzmannMachine& bm, const MeanFieldState& state)
    : GraphEvaluator(bm.weights(), state.moments_table) {}

GraphEvaluator::Table GraphEvaluator::weight_power(int k) const {
  if (static_cast<int>(weight_powers_.size()) <= k) weight_powers_.resize(static_cast<std::size_t>(k) + 1);
  auto& slot = weight_powers_[static_cast<std::size_t>(k)];
  if (!slot) {
    auto data = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_));
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b)
        (*data)[static_cast<std::size_t>(a) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(b)] =
            std::pow(weights_(a, b), k);
    slot = std::move(data);
  }
  return slot;
}

GraphEvaluator::Table GraphEvaluator::node_vector(int degree) const {
  if (static_cast<int>(node_vectors_.size()) <= degree) node_vectors_.resize(static_cast<std::size_t>(degree) + 1);
  auto& slot = node_vectors_[static_cast<std::size_t>(degree)];
  if (!slot) {
    auto data = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
      const auto& table = node_moments_[static_cast<std::size_t>(i)];
      if (static_cast<int>(table.size()) <= degree) {
        throw Error(ErrorCode::Configuration,
                    "corrected moment M'_" + std::to_string(degree) + " not tabulated for unit " +
                        std::to_string(i));
      }
      (*data)[static_cast<std::size_t>(i)] = table[static_cast<std::size_t>(degree)];
    }
    slot = std::move(data);
  }
  return slot;
}

bool GraphEvaluator::node_vector_is_zero(int degree) const {
  const auto& v = *node_vector(degree);
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

double GraphEvaluator::free_index_sum(const Multigraph& g, std::span<const int> order) const {
  if (static_cast<int>(order.size()) != g.num_nodes()) {
    throw Error(ErrorCode::Configuration, "elimination order must list every node once");
  }
  // M'_1 = 0: any degree-one node kills the whole term, and so does any
  // degree whose corrected moment vanishes on every unit (odd degrees at m = 0).
  for (int v = 0; v < g.num_nodes(); ++v) {
    if (g.degree(v) == 1 || node_vector_is_zero(g.degree(v))) return 0.0;
  }
  const auto edges = g.edges();
  if (static_cast<std::size_t>(g.num_nodes()) + edges.size() > kMaxFactors) {
    throw Error(ErrorCode::Configuration, "graph has too many factors for the evaluator");
  }
  if (!workspace_) workspace_ = std::make_shared<Workspace>();
  Workspace& ws = *workspace_;
  if (ws.outputs.size() < order.size()) ws.outputs.resize(order.size());

  std::vector<Factor> factors;
  factors.reserve(static_cast<std::size_t>(g.num_nodes()) + edges.size());
  for (int v = 0; v < g.num_nodes(); ++v) {
    Factor f;
    f.vars[0] = v;
    f.arity = 1;
    f.data = node_vector(g.degree(v))->data();
    factors.push_back(f);
  }
  for (const auto& e : edges) {
    Factor f;
    f.vars[0] = e.a;
    f.vars[1] = e.b;
    f.arity = 2;
    f.data = weight_power(e.multiplicity)->data();
    factors.push_back(f);
  }

  double scalar = 1.0;
  for (std::size_t step = 0; step < order.size(); ++step) {
    Factor f = eliminate(factors, order[step], n_, ws, ws.outputs[step]);
    if (f.arity == 0) {
      scalar *= f.data[0];
    } else {
      factors.push_back(f);
    }
  }
  return scalar;
}

double GraphEvaluator::contribution(const PartitionGraph& g) const {
  return free_index_sum(g.graph, g.elim_order) / static_cast<double>(g.automorphisms);
}

double GraphEvaluator::catalog_moment(const GraphCatalog& catalog) const {
  Accumulator acc;
  for (const auto& g : catalog.graphs) {
    acc.add(static_cast<double>(g.coefficient) * contribution(g));
  }
  return acc.value();
}

double graph_contribution(const BoltzmannMachine& bm, const MeanFieldState& state,
                          const PartitionGraph& graph) {
  return GraphEvaluator(bm, state).contribution(graph);
}

MomentVector coupling_moments_graph(const BoltzmannMachine& bm, const MeanFieldState& state,
                                    const CatalogSet& catalogs, int n_max) {
  if (n_max > kMaxCatalogOrder) {
    throw Error(ErrorCode::UnsupportedOrder,
                "graph path supports moments up to order " + std::to_string(kMaxCatalogOrder) +
                    ", requested " + std::to_string(n_max));
  }
  MomentVector out;
  out.values.assign(static_cast<std::size_t>(std::max(n_max, 0)) + 1, 0.0);
  out.values[0] = 1.0;
  const GraphEvaluator eval(bm, state);
  for (int n = 2; n <= n_max; ++n) {
    const auto it = catalogs.find(n);
    if (it == catalogs.end()) {
      throw Error(ErrorCode::MissingCatalog, "no partition catalog loaded for order " + std::to_string(n));
    }
    out.values[static_cast<std::size_t>(n)] = eval.catalog_moment(it->second);
  }
  return out;
}

MomentVector delta_h_moments_graph(const BoltzmannMachine& bm, const MeanFieldState& state,
                                   const CatalogSet& catalogs, int n_max) {
  if (!(state.residual <= kGraphPathResidualTol)) {
    throw Error(ErrorCode::Configuration,
                "graph path needs a mean-field solution (residual " + std::to_string(state.residual) +
                    "); use the enumeration path");
  }
  return coupling_moments_graph(bm, state, catalogs, n_max);
}

}  // namespace polybound
