#ifndef POLYURN_PREFIX_TREE_HPP
#define POLYURN_PREFIX_TREE_HPP

// Fenwick tree over nonnegative weights with an O(log n) "find the leaf
// containing prefix mass u" walk. This is the index structure behind the
// dynamic weighted sampler: point updates and sampling are both logarithmic.

#include <cstddef>
#include <vector>

namespace polyurn {

class PrefixSumTree {
  public:
    explicit PrefixSumTree(std::size_t n = 0) { reset(n); }

    void reset(std::size_t n) {
        n_ = n;
        leaf_.assign(n, 0.0);
        tree_.assign(n + 1, 0.0);
        total_ = 0.0;
        top_ = 1;
        while (top_ * 2 <= n_) top_ *= 2;
    }

    std::size_t size() const { return n_; }
    double total() const { return total_; }
    double get(std::size_t i) const { return leaf_[i]; }

    void set(std::size_t i, double v) {
        const double d = v - leaf_[i];
        leaf_[i] = v;
        total_ += d;
        for (std::size_t j = i + 1; j <= n_; j += j & (~j + 1)) tree_[j] += d;
    }

    // Smallest index i with leaf_[0]+...+leaf_[i] > u. For u drawn uniformly
    // from [0, total) this samples i with probability leaf_[i]/total.
    std::size_t find(double u) const {
        std::size_t idx = 0;
        for (std::size_t step = top_; step > 0; step >>= 1) {
            const std::size_t next = idx + step;
            if (next <= n_ && tree_[next] <= u) {
                u -= tree_[next];
                idx = next;
            }
        }
        // rounding can push u past the last occupied leaf
        return idx < n_ ? idx : n_ - 1;
    }

    // Rebuild from a full weight vector in O(n).
    void assign(const std::vector<double>& w) {
        if (w.size() != n_) reset(w.size());
        total_ = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            leaf_[i] = w[i];
            tree_[i + 1] = w[i];
            total_ += w[i];
        }
        for (std::size_t j = 1; j <= n_; ++j) {
            const std::size_t parent = j + (j & (~j + 1));
            if (parent <= n_) tree_[parent] += tree_[j];
        }
    }

  private:
    std::size_t n_ = 0;
    std::size_t top_ = 1;
    double total_ = 0.0;
    std::vector<double> leaf_;
    std::vector<double> tree_;
};

} // namespace polyurn

#endif // POLYURN_PREFIX_TREE_HPP
