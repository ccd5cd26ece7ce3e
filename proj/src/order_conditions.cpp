#include "bprk/order_conditions.hpp"

#include <algorithm>
#include <stdexcept>

namespace bprk {

namespace {

// Finish a tree whose children are already canonical: sort them, then
// derive encoding, order and density.
RootedTree seal(std::vector<RootedTree> children) {
  RootedTree t;
  t.children = std::move(children);
  std::sort(t.children.begin(), t.children.end(),
            [](const RootedTree& a, const RootedTree& b) {
              return a.encoding < b.encoding;
            });
  t.order = 1;
  t.encoding = "(";
  for (const RootedTree& ch : t.children) {
    t.order += ch.order;
    t.encoding += ch.encoding;
  }
  t.encoding += ")";
  t.density = t.order;
  for (const RootedTree& ch : t.children) t.density *= ch.density;
  return t;
}

// Extend `chosen` with trees from `pool` (indices >= `first`, non-decreasing
// so each multiset is produced once) until `budget` nodes are used up, then
// emit the sealed tree.
void build_multisets(const std::vector<RootedTree>& pool, std::size_t first,
                     int budget, std::vector<RootedTree>& chosen,
                     std::vector<RootedTree>& out) {
  if (budget == 0) {
    out.push_back(seal(chosen));
    return;
  }
  for (std::size_t i = first; i < pool.size(); ++i) {
    if (pool[i].order > budget) continue;
    chosen.push_back(pool[i]);
    build_multisets(pool, i, budget - pool[i].order, chosen, out);
    chosen.pop_back();
  }
}

}  // namespace

std::vector<RootedTree> enumerate_trees(int max_order) {
  if (max_order < 1 || max_order > kMaxConditionOrder)
    throw std::invalid_argument("enumerate_trees: order must be in [1, 5]");
  std::vector<RootedTree> trees = {seal({})};
  for (int n = 2; n <= max_order; ++n) {
    // Children are drawn from trees of order < n with n-1 nodes in total.
    std::vector<RootedTree> pool(trees.begin(), trees.end());
    std::vector<RootedTree> chosen;
    std::vector<RootedTree> fresh;
    build_multisets(pool, 0, n - 1, chosen, fresh);
    for (RootedTree& t : fresh)
      if (t.order == n) trees.push_back(std::move(t));
  }
  std::sort(trees.begin(), trees.end(),
            [](const RootedTree& a, const RootedTree& b) {
              return a.order != b.order ? a.order < b.order
                                        : a.encoding < b.encoding;
            });
  return trees;
}

int condition_count(int p) {
  static const int counts[] = {0, 1, 2, 4, 8, 17};
  if (p < 1 || p > kMaxConditionOrder)
    throw std::invalid_argument("condition_count: order must be in [1, 5]");
  return counts[p];
}

Eigen::VectorXd elementary_weight(const Eigen::MatrixXd& A, const RootedTree& tau) {
  Eigen::VectorXd psi = Eigen::VectorXd::Ones(A.rows());
  for (const RootedTree& ch : tau.children)
    psi = psi.cwiseProduct((A * elementary_weight(A, ch)).eval());
  return psi;
}

OrderConditionSystem assemble(const ButcherTableau& tableau, int p) {
  OrderConditionSystem sys;
  sys.order = p;
  sys.trees = enumerate_trees(p);
  const Eigen::Index s = tableau.stages();
  sys.Q.resize(static_cast<Eigen::Index>(sys.trees.size()), s);
  sys.r.resize(static_cast<Eigen::Index>(sys.trees.size()));
  for (std::size_t i = 0; i < sys.trees.size(); ++i) {
    sys.Q.row(static_cast<Eigen::Index>(i)) =
        elementary_weight(tableau.A, sys.trees[i]).transpose();
    sys.r(static_cast<Eigen::Index>(i)) = 1.0 / static_cast<double>(sys.trees[i].density);
  }
  if (static_cast<int>(sys.trees.size()) != condition_count(p))
    throw std::logic_error("order condition row count mismatch");
  return sys;
}

int degrees_of_freedom(const ButcherTableau& tableau, int p) {
  const OrderConditionSystem sys = assemble(tableau, p);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.Q);
  svd.setThreshold(1e-8);
  return static_cast<int>(tableau.stages() - svd.rank());
}

}  // namespace bprk
