#ifndef FEPINN_TAPE_HPP
#define FEPINN_TAPE_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace fepinn {

/// Append-only operation record for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, so every parent index is smaller
/// than its child's index and a single backward scan propagates adjoints.
/// A node stores only its (parent, local partial) pairs in a CSR layout;
/// values live in the Var handles, not on the tape. Leaves (trainable
/// parameters) are registered first so that after a reverse sweep the first
/// `n` adjoints are the gradient in parameter layout order.
class Tape {
public:
    struct Mark {
        size_t nodes;
        size_t pairs;
    };

    void clear() {
        starts_.clear();
        parents_.clear();
        partials_.clear();
    }

    size_t size() const { return starts_.size(); }
    size_t pair_count() const { return parents_.size(); }

    Mark mark() const { return {starts_.size(), parents_.size()}; }

    /// Drops every node recorded after `m`. Leaves recorded before the mark
    /// stay valid, which lets one tape be reused across per-point evaluations.
    void rewind(Mark m) {
        if (m.nodes > starts_.size() || m.pairs > parents_.size())
            throw std::invalid_argument("tape rewind past current frontier");
        starts_.resize(m.nodes);
        parents_.resize(m.pairs);
        partials_.resize(m.pairs);
    }

    /// Registers an input node with no parents (a trainable parameter).
    int32_t leaf() {
        starts_.push_back(static_cast<uint32_t>(parents_.size()));
        return static_cast<int32_t>(starts_.size()) - 1;
    }

    /// Incrementally builds one node with an arbitrary number of parents.
    /// Builders must be finished before the next node is started.
    class NodeBuilder {
    public:
        void pair(int32_t parent, double partial) {
            tape_->parents_.push_back(parent);
            tape_->partials_.push_back(partial);
        }
        bool empty() const { return tape_->parents_.size() == start_; }
        int32_t finish() {
            tape_->starts_.push_back(start_);
            return static_cast<int32_t>(tape_->starts_.size()) - 1;
        }

    private:
        friend class Tape;
        NodeBuilder(Tape* t, uint32_t s) : tape_(t), start_(s) {}
        Tape* tape_;
        uint32_t start_;
    };

    NodeBuilder begin_node() {
        return NodeBuilder(this, static_cast<uint32_t>(parents_.size()));
    }

    /// Reverse sweep from `root`. Writes the adjoints of the first
    /// `out.size()` nodes (the leaves) into `out`.
    void gradient(int32_t root, std::span<double> out) {
        const size_t n = starts_.size();
        if (root < 0 || static_cast<size_t>(root) >= n)
            throw std::invalid_argument("gradient root is not a live node on this tape");
        if (out.size() > n)
            throw std::invalid_argument("gradient output span exceeds tape size");
        adjoint_.assign(n, 0.0);
        adjoint_[static_cast<size_t>(root)] = 1.0;
        for (int32_t i = root; i >= 0; --i) {
            const double a = adjoint_[static_cast<size_t>(i)];
            if (a == 0.0) continue;
            const uint32_t b = starts_[static_cast<size_t>(i)];
            const uint32_t e = (static_cast<size_t>(i) + 1 < n)
                                   ? starts_[static_cast<size_t>(i) + 1]
                                   : static_cast<uint32_t>(parents_.size());
            for (uint32_t u = b; u < e; ++u)
                adjoint_[static_cast<size_t>(parents_[u])] += a * partials_[u];
        }
        for (size_t i = 0; i < out.size(); ++i) out[i] = adjoint_[i];
    }

private:
    std::vector<uint32_t> starts_;
    std::vector<int32_t> parents_;
    std::vector<double> partials_;
    std::vector<double> adjoint_;
};

/// Scalar bound to a tape node. `id < 0` marks a constant that no node tracks;
/// arithmetic folds constants so untracked subexpressions never touch the tape.
struct Var {
    double v = 0.0;
    int32_t id = -1;
    Tape* tape = nullptr;

    Var() = default;
    Var(double value) : v(value) {}
    Var(double value, int32_t node, Tape* t) : v(value), id(node), tape(t) {}

    bool tracked() const { return id >= 0; }
};

/// Registers `values` as consecutive leaves and returns them as Vars with
/// ids 0..n-1. Must be called on a fresh tape.
inline std::vector<Var> register_leaves(Tape& tape, std::span<const double> values) {
    if (tape.size() != 0)
        throw std::invalid_argument("leaves must be registered on an empty tape");
    std::vector<Var> out;
    out.reserve(values.size());
    for (double v : values) out.emplace_back(v, tape.leaf(), &tape);
    return out;
}

namespace detail {

inline Tape* join_tapes(const Var& a, const Var& b) {
    if (a.tape && b.tape && a.tape != b.tape)
        throw std::invalid_argument("operands recorded on different tapes");
    return a.tape ? a.tape : b.tape;
}

inline Var unary_node(double value, const Var& a, double da) {
    if (!a.tracked() || da == 0.0) return Var(value);
    auto nb = a.tape->begin_node();
    nb.pair(a.id, da);
    return Var(value, nb.finish(), a.tape);
}

inline Var binary_node(double value, const Var& a, double da, const Var& b, double db) {
    Tape* t = join_tapes(a, b);
    const bool ta = a.tracked() && da != 0.0;
    const bool tb = b.tracked() && db != 0.0;
    if (!ta && !tb) return Var(value);
    auto nb = t->begin_node();
    if (ta) nb.pair(a.id, da);
    if (tb) nb.pair(b.id, db);
    return Var(value, nb.finish(), t);
}

} // namespace detail

inline Var operator+(const Var& a, const Var& b) {
    return detail::binary_node(a.v + b.v, a, 1.0, b, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
    return detail::binary_node(a.v - b.v, a, 1.0, b, -1.0);
}
inline Var operator*(const Var& a, const Var& b) {
    detail::join_tapes(a, b);
    return detail::binary_node(a.v * b.v, a, b.v, b, a.v);
}
inline Var operator/(const Var& a, const Var& b) {
    detail::join_tapes(a, b);
    if (b.v == 0.0) throw std::runtime_error("division by a zero-valued operand");
    return detail::binary_node(a.v / b.v, a, 1.0 / b.v, b, -a.v / (b.v * b.v));
}
inline Var operator-(const Var& a) { return detail::unary_node(-a.v, a, -1.0); }

inline Var operator+(const Var& a, double c) { return detail::unary_node(a.v + c, a, 1.0); }
inline Var operator+(double c, const Var& a) { return a + c; }
inline Var operator-(const Var& a, double c) { return detail::unary_node(a.v - c, a, 1.0); }
inline Var operator-(double c, const Var& a) { return detail::unary_node(c - a.v, a, -1.0); }
inline Var operator*(const Var& a, double c) { return detail::unary_node(a.v * c, a, c); }
inline Var operator*(double c, const Var& a) { return a * c; }
inline Var operator/(const Var& a, double c) {
    if (c == 0.0) throw std::runtime_error("division by a zero-valued operand");
    return detail::unary_node(a.v / c, a, 1.0 / c);
}
inline Var operator/(double c, const Var& a) {
    if (a.v == 0.0) throw std::runtime_error("division by a zero-valued operand");
    return detail::unary_node(c / a.v, a, -c / (a.v * a.v));
}

inline Var tanh(const Var& a) {
    const double t = std::tanh(a.v);
    return detail::unary_node(t, a, 1.0 - t * t);
}
inline Var exp(const Var& a) {
    const double e = std::exp(a.v);
    return detail::unary_node(e, a, e);
}
inline Var sin(const Var& a) { return detail::unary_node(std::sin(a.v), a, std::cos(a.v)); }
inline Var cos(const Var& a) { return detail::unary_node(std::cos(a.v), a, -std::sin(a.v)); }
inline Var square(const Var& a) { return detail::unary_node(a.v * a.v, a, 2.0 * a.v); }

inline double value_of(double x) { return x; }
inline double value_of(const Var& x) { return x.v; }

} // namespace fepinn

#endif
