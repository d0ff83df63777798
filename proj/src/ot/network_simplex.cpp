// Primal network simplex for the balanced transportation problem.
//
// The spanning-tree bookkeeping (parent/thread/successor lists) follows the
// classic LEMON NetworkSimplex layout: one artificial root joined to every
// node, a strongly feasible initial tree, and the leaving-arc tie break that
// keeps the tree strongly feasible, which rules out cycling under any entering
// rule. All real arcs are uncapacitated.

#include "otval/ot/network_simplex.hpp"

#include <algorithm>
#include <cfloat>
#include <climits>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "otval/error.hpp"
#include "otval/measure.hpp"
#include "otval/simd/kernels.hpp"

namespace otval {
namespace {

constexpr std::int8_t kStateTree = 0;
constexpr std::int8_t kStateLower = 1;
constexpr std::int8_t kDirUp = 1;
constexpr std::int8_t kDirDown = -1;
constexpr double kInf = std::numeric_limits<double>::infinity();

thread_local std::int64_t t_last_pivots = 0;

class TransportSimplex {
 public:
  TransportSimplex(const Matrix& cost, const Vector& a, const Vector& b,
                   const SimplexOptions& options)
      : n_(static_cast<int>(cost.rows())),
        m_(static_cast<int>(cost.cols())),
        node_num_(n_ + m_),
        arc_num_(n_ * m_),
        all_arc_num_(arc_num_ + node_num_),
        root_(node_num_),
        options_(options) {
    source_.resize(all_arc_num_);
    target_.resize(all_arc_num_);
    cost_.resize(all_arc_num_);
    flow_.assign(all_arc_num_, 0.0);
    state_.assign(all_arc_num_, kStateLower);

    double max_cost = 0.0;
    const double* c = cost.data();
    for (int e = 0; e < arc_num_; ++e) {
      source_[e] = e / m_;
      target_[e] = n_ + e % m_;
      cost_[e] = c[e];
      max_cost = std::max(max_cost, std::abs(c[e]));
    }
    art_cost_ = (max_cost + 1.0) * static_cast<double>(node_num_);
    eps_ = 4.0 * DBL_EPSILON * art_cost_;

    supply_.resize(node_num_ + 1);
    const double sa = a.sum();
    const double sb = b.sum();
    double total = 0.0;
    for (int i = 0; i < n_; ++i) {
      supply_[i] = a[i] / sa;
      total += supply_[i];
    }
    for (int j = 0; j < m_; ++j) {
      supply_[n_ + j] = -b[j] / sb;
      total += supply_[n_ + j];
    }
    supply_[root_] = -total;

    block_size_ = std::max(10, static_cast<int>(std::sqrt(static_cast<double>(arc_num_))));
    init_tree();
  }

  void run() {
    std::int64_t pivots = 0;
    const std::int64_t refresh = std::max<std::int64_t>(1000, node_num_);
    for (;;) {
      if (!find_entering_arc()) {
        // Confirm optimality against drift-free potentials before stopping.
        recompute_potentials();
        if (!find_entering_arc()) break;
      }
      if (++pivots > options_.max_pivots) {
        t_last_pivots = pivots;
        throw SolverError("network simplex exceeded the pivot limit of " +
                          std::to_string(options_.max_pivots));
      }
      find_join_node();
      if (!find_leaving_arc()) throw SolverError("network simplex: unbounded pivot cycle");
      change_flow();
      update_tree_structure();
      update_potential();
      if (pivots % refresh == 0) recompute_potentials();
    }
    t_last_pivots = pivots;

    double stray = 0.0;
    for (int e = arc_num_; e < all_arc_num_; ++e) stray += flow_[e];
    if (stray > 1e-12) {
      throw SolverError("network simplex: artificial arcs retain mass " + std::to_string(stray));
    }
  }

  Matrix coupling() const {
    Matrix plan(n_, m_);
    double* out = plan.data();
    for (int e = 0; e < arc_num_; ++e) out[e] = std::max(0.0, flow_[e]);
    return plan;
  }

  DualPotentials potentials() const {
    DualPotentials pot;
    pot.f.resize(n_);
    pot.g.resize(m_);
    for (int i = 0; i < n_; ++i) pot.f[i] = -pi_[i];
    for (int j = 0; j < m_; ++j) pot.g[j] = pi_[n_ + j];
    return pot;
  }

 private:
  void init_tree() {
    const int nodes = node_num_ + 1;
    parent_.resize(nodes);
    pred_.resize(nodes);
    thread_.resize(nodes);
    rev_thread_.resize(nodes);
    succ_num_.resize(nodes);
    last_succ_.resize(nodes);
    pred_dir_.resize(nodes);
    pi_.resize(nodes);

    parent_[root_] = -1;
    pred_[root_] = -1;
    thread_[root_] = 0;
    rev_thread_[0] = root_;
    succ_num_[root_] = node_num_ + 1;
    last_succ_[root_] = root_ - 1;
    pi_[root_] = 0.0;

    for (int u = 0, e = arc_num_; u < node_num_; ++u, ++e) {
      parent_[u] = root_;
      pred_[u] = e;
      thread_[u] = u + 1;
      rev_thread_[u + 1] = u;
      succ_num_[u] = 1;
      last_succ_[u] = u;
      state_[e] = kStateTree;
      if (supply_[u] >= 0.0) {
        pred_dir_[u] = kDirUp;
        pi_[u] = 0.0;
        source_[e] = u;
        target_[e] = root_;
        flow_[e] = supply_[u];
        cost_[e] = 0.0;
      } else {
        pred_dir_[u] = kDirDown;
        pi_[u] = art_cost_;
        source_[e] = root_;
        target_[e] = u;
        flow_[e] = -supply_[u];
        cost_[e] = art_cost_;
      }
    }
  }

  double reduced_cost(int e) const {
    return static_cast<double>(state_[e]) * ((cost_[e] + pi_[source_[e]]) - pi_[target_[e]]);
  }

  bool find_entering_arc() {
    return options_.rule == PivotRule::kBland ? find_entering_bland() : find_entering_block();
  }

  bool find_entering_bland() {
    for (int e = 0; e < arc_num_; ++e) {
      if (reduced_cost(e) < -eps_) {
        in_arc_ = e;
        return true;
      }
    }
    return false;
  }

  // Scans [from, to) in row-contiguous chunks through the pricing kernel.
  // Returns true once a completed block holds an improving arc.
  bool scan_blocks(int from, int to, int& budget, double& best, int& best_arc) {
    int e = from;
    while (e < to) {
      const int row = e / m_;
      const int col = e - row * m_;
      const int len = std::min({to - e, m_ - col, budget});
      const simd::ArgMin r = simd::argmin_reduced_cost(
          cost_.data() + e, state_.data() + e, pi_[row], pi_.data() + n_ + col,
          static_cast<std::size_t>(len));
      if (r.value < best) {
        best = r.value;
        best_arc = e + static_cast<int>(r.index);
      }
      e += len;
      budget -= len;
      if (budget == 0) {
        if (best_arc >= 0) {
          next_arc_ = e == arc_num_ ? 0 : e;
          return true;
        }
        budget = block_size_;
      }
    }
    return false;
  }

  bool find_entering_block() {
    double best = -eps_;
    int best_arc = -1;
    int budget = block_size_;
    const int start = next_arc_;
    if (!scan_blocks(start, arc_num_, budget, best, best_arc) &&
        !scan_blocks(0, start, budget, best, best_arc)) {
      if (best_arc < 0) return false;
      next_arc_ = start;
    }
    in_arc_ = best_arc;
    return true;
  }

  void find_join_node() {
    int u = source_[in_arc_];
    int v = target_[in_arc_];
    while (u != v) {
      if (succ_num_[u] < succ_num_[v]) {
        u = parent_[u];
      } else {
        v = parent_[v];
      }
    }
    join_ = u;
  }

  bool find_leaving_arc() {
    int first;
    int second;
    if (state_[in_arc_] == kStateLower) {
      first = source_[in_arc_];
      second = target_[in_arc_];
    } else {
      first = target_[in_arc_];
      second = source_[in_arc_];
    }
    delta_ = kInf;
    int result = 0;
    for (int u = first; u != join_; u = parent_[u]) {
      const double d = pred_dir_[u] == kDirDown ? kInf : flow_[pred_[u]];
      if (d < delta_) {
        delta_ = d;
        u_out_ = u;
        result = 1;
      }
    }
    for (int u = second; u != join_; u = parent_[u]) {
      const double d = pred_dir_[u] == kDirUp ? kInf : flow_[pred_[u]];
      if (d <= delta_) {
        delta_ = d;
        u_out_ = u;
        result = 2;
      }
    }
    if (result == 0) return false;
    if (result == 1) {
      u_in_ = first;
      v_in_ = second;
    } else {
      u_in_ = second;
      v_in_ = first;
    }
    return true;
  }

  void change_flow() {
    if (delta_ > 0.0) {
      const double val = static_cast<double>(state_[in_arc_]) * delta_;
      flow_[in_arc_] += val;
      for (int u = source_[in_arc_]; u != join_; u = parent_[u]) {
        flow_[pred_[u]] -= static_cast<double>(pred_dir_[u]) * val;
      }
      for (int u = target_[in_arc_]; u != join_; u = parent_[u]) {
        flow_[pred_[u]] += static_cast<double>(pred_dir_[u]) * val;
      }
    }
    state_[in_arc_] = kStateTree;
    flow_[pred_[u_out_]] = 0.0;
    state_[pred_[u_out_]] = kStateLower;
  }

  void update_tree_structure() {
    const int old_rev_thread = rev_thread_[u_out_];
    const int old_succ_num = succ_num_[u_out_];
    const int old_last_succ = last_succ_[u_out_];
    v_out_ = parent_[u_out_];

    if (u_in_ == u_out_) {
      parent_[u_in_] = v_in_;
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kDirUp : kDirDown;

      if (thread_[v_in_] != u_out_) {
        int after = thread_[old_last_succ];
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
        after = thread_[v_in_];
        thread_[v_in_] = u_out_;
        rev_thread_[u_out_] = v_in_;
        thread_[old_last_succ] = after;
        rev_thread_[after] = old_last_succ;
      }
    } else {
      // When old_rev_thread == v_in, join and v_out coincide.
      const int thread_continue =
          old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];

      // Re-hang the stem u_in .. u_out below v_in, reversing parent links.
      int stem = u_in_;
      int par_stem = v_in_;
      int last = last_succ_[u_in_];
      int after = thread_[last];
      thread_[v_in_] = u_in_;
      dirty_revs_.clear();
      dirty_revs_.push_back(v_in_);
      while (stem != u_out_) {
        const int next_stem = parent_[stem];
        thread_[last] = next_stem;
        dirty_revs_.push_back(last);

        const int before = rev_thread_[stem];
        thread_[before] = after;
        rev_thread_[after] = before;

        parent_[stem] = par_stem;
        par_stem = stem;
        stem = next_stem;

        last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem]
                                                         : last_succ_[stem];
        after = thread_[last];
      }
      parent_[u_out_] = par_stem;
      thread_[last] = thread_continue;
      rev_thread_[thread_continue] = last;
      last_succ_[u_out_] = last;

      if (old_rev_thread != v_in_) {
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
      }

      for (const int u : dirty_revs_) rev_thread_[thread_[u]] = u;

      int tmp_sc = 0;
      const int tmp_ls = last_succ_[u_out_];
      for (int u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
        pred_[u] = pred_[p];
        pred_dir_[u] = static_cast<std::int8_t>(-pred_dir_[p]);
        tmp_sc += succ_num_[u] - succ_num_[p];
        succ_num_[u] = tmp_sc;
        last_succ_[p] = tmp_ls;
      }
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kDirUp : kDirDown;
      succ_num_[u_in_] = old_succ_num;
    }

    const int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
    const int last_succ_out = last_succ_[u_out_];
    for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) {
      last_succ_[u] = last_succ_out;
    }

    if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ;
           u = parent_[u]) {
        last_succ_[u] = old_rev_thread;
      }
    } else if (last_succ_out != old_last_succ) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ;
           u = parent_[u]) {
        last_succ_[u] = last_succ_out;
      }
    }

    for (int u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
    for (int u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
  }

  void update_potential() {
    const double sigma =
        pi_[v_in_] - pi_[u_in_] - static_cast<double>(pred_dir_[u_in_]) * cost_[in_arc_];
    const int end = thread_[last_succ_[u_in_]];
    for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
  }

  // Tree arcs have zero reduced cost; walking the thread (a preorder) from
  // the root rebuilds every potential from its parent.
  void recompute_potentials() {
    pi_[root_] = 0.0;
    for (int u = thread_[root_]; u != root_; u = thread_[u]) {
      const int e = pred_[u];
      const int p = parent_[u];
      pi_[u] = pred_dir_[u] == kDirUp ? pi_[p] - cost_[e] : pi_[p] + cost_[e];
    }
  }

  const int n_;
  const int m_;
  const int node_num_;
  const int arc_num_;
  const int all_arc_num_;
  const int root_;
  const SimplexOptions options_;

  double art_cost_ = 0.0;
  double eps_ = 0.0;
  int block_size_ = 10;
  int next_arc_ = 0;

  std::vector<int> source_;
  std::vector<int> target_;
  std::vector<double> cost_;
  std::vector<double> flow_;
  std::vector<std::int8_t> state_;
  std::vector<double> supply_;

  std::vector<int> parent_;
  std::vector<int> pred_;
  std::vector<int> thread_;
  std::vector<int> rev_thread_;
  std::vector<int> succ_num_;
  std::vector<int> last_succ_;
  std::vector<std::int8_t> pred_dir_;
  std::vector<double> pi_;
  std::vector<int> dirty_revs_;

  int in_arc_ = -1;
  int join_ = -1;
  int u_in_ = -1;
  int v_in_ = -1;
  int u_out_ = -1;
  int v_out_ = -1;
  double delta_ = 0.0;
};

}  // namespace

std::int64_t last_pivot_count() { return t_last_pivots; }

OtSolution solve_exact(const CostMatrix& cost, const Vector& a, const Vector& b,
                       const SimplexOptions& options) {
  const Index n = cost.rows();
  const Index m = cost.cols();
  if (n < 1 || m < 1) throw InputError("solve_exact: empty cost matrix");
  validate_weights(a, n, "solve_exact source");
  validate_weights(b, m, "solve_exact target");
  if (!cost.entries.allFinite()) throw InputError("solve_exact: non-finite cost entries");
  if (static_cast<double>(n) * static_cast<double>(m) + static_cast<double>(n + m) >=
      static_cast<double>(INT_MAX)) {
    throw InputError("solve_exact: problem too large for 32-bit arc indices");
  }

  TransportSimplex simplex(cost.entries, a, b, options);
  simplex.run();

  OtSolution sol;
  sol.plan.coupling = simplex.coupling();
  sol.plan.source_weights = a;
  sol.plan.target_weights = b;
  sol.potentials = simplex.potentials();
  normalize_potentials(sol.potentials, b);
  sol.transport_cost = std::max(0.0, (sol.plan.coupling.array() * cost.entries.array()).sum());
  sol.distance = std::pow(sol.transport_cost, 1.0 / cost.power);
  return sol;
}

}  // namespace otval
