#ifndef FEPINN_JET_HPP
#define FEPINN_JET_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <type_traits>

#include "fepinn/tape.hpp"

namespace fepinn {

/// Truncated second-order Taylor coefficients of a scalar quantity with
/// respect to up to three inputs, propagated forward through arithmetic.
///
/// The scalar type S is `double` for plain evaluation (sampling scores,
/// reference solutions) or `Var` when parameter gradients are also needed:
/// every jet component is then itself a node on a reverse-mode tape.
///
/// The Hessian block stores the upper triangle once, row-major; `hess(i, j)`
/// mirrors reads so symmetry holds exactly by construction.
template <class S>
struct Jet2 {
    static constexpr int max_dim = 3;

    int dim = 0;    // number of differentiated inputs, 1..3
    int order = 2;  // 0: value only, 1: + gradient, 2: + Hessian
    S v{};
    std::array<S, max_dim> g{};
    std::array<S, max_dim*(max_dim + 1) / 2> h{};

    int n_grad() const { return order >= 1 ? dim : 0; }
    int n_hess() const { return order >= 2 ? dim * (dim + 1) / 2 : 0; }

    int sym_index(int i, int j) const {
        if (i < 0 || j < 0 || i >= dim || j >= dim)
            throw std::out_of_range("hessian index outside jet dimension");
        if (i > j) std::swap(i, j);
        return i * dim - i * (i - 1) / 2 + (j - i);
    }

    const S& hess(int i, int j) const { return h[static_cast<size_t>(sym_index(i, j))]; }
    S& hess(int i, int j) { return h[static_cast<size_t>(sym_index(i, j))]; }
};

using JetD = Jet2<double>;
using JetV = Jet2<Var>;

namespace detail {

inline void check_jet_shape(int n_inputs, int order) {
    if (n_inputs < 1 || n_inputs > Jet2<double>::max_dim)
        throw std::invalid_argument("jet dimension must be between 1 and 3");
    if (order < 0 || order > 2)
        throw std::invalid_argument("jet order must be 0, 1 or 2");
}

template <class S>
Jet2<S> make_compat(const Jet2<S>& a, const Jet2<S>& b) {
    if (a.dim != b.dim)
        throw std::invalid_argument("jet operands have different input dimensions");
    Jet2<S> r;
    r.dim = a.dim;
    r.order = a.order < b.order ? a.order : b.order;
    return r;
}

} // namespace detail

template <class S>
Jet2<S> lift_constant(double c, int n_inputs, int order = 2) {
    detail::check_jet_shape(n_inputs, order);
    Jet2<S> r;
    r.dim = n_inputs;
    r.order = order;
    r.v = S(c);
    return r;
}

inline JetD lift_constant(double c, int n_inputs, int order = 2) {
    return lift_constant<double>(c, n_inputs, order);
}

template <class S>
Jet2<S> lift_coordinate(double x, int index, int n_inputs, int order = 2) {
    detail::check_jet_shape(n_inputs, order);
    if (index < 0 || index >= n_inputs)
        throw std::out_of_range("coordinate index outside jet dimension");
    Jet2<S> r;
    r.dim = n_inputs;
    r.order = order;
    r.v = S(x);
    if (order >= 1) r.g[static_cast<size_t>(index)] = S(1.0);
    return r;
}

inline JetD lift_coordinate(double x, int index, int n_inputs, int order = 2) {
    return lift_coordinate<double>(x, index, n_inputs, order);
}

template <class S>
Jet2<S> operator+(const Jet2<S>& a, const Jet2<S>& b) {
    Jet2<S> r = detail::make_compat(a, b);
    r.v = a.v + b.v;
    for (int i = 0; i < r.n_grad(); ++i) r.g[i] = a.g[i] + b.g[i];
    for (int k = 0; k < r.n_hess(); ++k) r.h[k] = a.h[k] + b.h[k];
    return r;
}

template <class S>
Jet2<S> operator-(const Jet2<S>& a, const Jet2<S>& b) {
    Jet2<S> r = detail::make_compat(a, b);
    r.v = a.v - b.v;
    for (int i = 0; i < r.n_grad(); ++i) r.g[i] = a.g[i] - b.g[i];
    for (int k = 0; k < r.n_hess(); ++k) r.h[k] = a.h[k] - b.h[k];
    return r;
}

template <class S>
Jet2<S> operator-(const Jet2<S>& a) {
    Jet2<S> r = a;
    r.v = -a.v;
    for (int i = 0; i < r.n_grad(); ++i) r.g[i] = -a.g[i];
    for (int k = 0; k < r.n_hess(); ++k) r.h[k] = -a.h[k];
    return r;
}

template <class S>
Jet2<S> operator*(const Jet2<S>& a, const Jet2<S>& b) {
    Jet2<S> r = detail::make_compat(a, b);
    r.v = a.v * b.v;
    for (int i = 0; i < r.n_grad(); ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
    if (r.order >= 2) {
        for (int i = 0; i < r.dim; ++i)
            for (int j = i; j < r.dim; ++j) {
                const int k = r.sym_index(i, j);
                r.h[k] = a.h[k] * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] + a.v * b.h[k];
            }
    }
    return r;
}

template <class S>
Jet2<S> operator/(const Jet2<S>& a, const Jet2<S>& b) {
    if (value_of(b.v) == 0.0)
        throw std::runtime_error("jet division by a zero-valued operand");
    Jet2<S> r = detail::make_compat(a, b);
    const S w = 1.0 / b.v;   // for S = Var this records the reciprocal node
    const S w2 = w * w;
    r.v = a.v * w;
    for (int i = 0; i < r.n_grad(); ++i)
        r.g[i] = (a.g[i] * b.v - a.v * b.g[i]) * w2;
    if (r.order >= 2) {
        const S w3 = w2 * w;
        for (int i = 0; i < r.dim; ++i)
            for (int j = i; j < r.dim; ++j) {
                const int k = r.sym_index(i, j);
                r.h[k] = (a.h[k] * b.v * b.v
                          - b.v * (a.g[i] * b.g[j] + a.g[j] * b.g[i] + a.v * b.h[k])
                          + 2.0 * a.v * b.g[i] * b.g[j]) * w3;
            }
    }
    return r;
}

// Mixed jet/double forms: a plain double acts as a constant jet.
template <class S>
Jet2<S> operator+(const Jet2<S>& a, double c) {
    Jet2<S> r = a;
    r.v = a.v + c;
    return r;
}
template <class S>
Jet2<S> operator+(double c, const Jet2<S>& a) { return a + c; }
template <class S>
Jet2<S> operator-(const Jet2<S>& a, double c) { return a + (-c); }
template <class S>
Jet2<S> operator-(double c, const Jet2<S>& a) { return (-a) + c; }

template <class S>
Jet2<S> operator*(const Jet2<S>& a, double c) {
    Jet2<S> r = a;
    r.v = a.v * c;
    for (int i = 0; i < r.n_grad(); ++i) r.g[i] = a.g[i] * c;
    for (int k = 0; k < r.n_hess(); ++k) r.h[k] = a.h[k] * c;
    return r;
}
template <class S>
Jet2<S> operator*(double c, const Jet2<S>& a) { return a * c; }
template <class S>
Jet2<S> operator/(const Jet2<S>& a, double c) {
    if (c == 0.0) throw std::runtime_error("jet division by a zero-valued operand");
    return a * (1.0 / c);
}

namespace detail {

/// Chain rule for f applied to jet a, given f(a.v), f'(a.v), f''(a.v).
template <class S>
Jet2<S> apply_unary(const Jet2<S>& a, const S& f, const S& fp, const S& fpp) {
    Jet2<S> r;
    r.dim = a.dim;
    r.order = a.order;
    r.v = f;
    for (int i = 0; i < r.n_grad(); ++i) r.g[i] = fp * a.g[i];
    if (r.order >= 2) {
        for (int i = 0; i < r.dim; ++i)
            for (int j = i; j < r.dim; ++j) {
                const int k = r.sym_index(i, j);
                r.h[k] = fpp * (a.g[i] * a.g[j]) + fp * a.h[k];
            }
    }
    return r;
}

} // namespace detail

template <class S>
Jet2<S> tanh(const Jet2<S>& a) {
    using std::tanh;
    const S t = tanh(a.v);
    const S fp = 1.0 - t * t;
    const S fpp = -2.0 * (t * fp);
    return detail::apply_unary(a, t, fp, fpp);
}

template <class S>
Jet2<S> exp(const Jet2<S>& a) {
    using std::exp;
    const S e = exp(a.v);
    return detail::apply_unary(a, e, e, e);
}

template <class S>
Jet2<S> sin(const Jet2<S>& a) {
    using std::cos;
    using std::sin;
    const S s = sin(a.v);
    const S c = cos(a.v);
    return detail::apply_unary(a, s, c, -s);
}

template <class S>
Jet2<S> cos(const Jet2<S>& a) {
    using std::cos;
    using std::sin;
    const S c = cos(a.v);
    const S s = sin(a.v);
    return detail::apply_unary(a, c, -s, -c);
}

template <class S>
Jet2<S> square(const Jet2<S>& a) {
    return detail::apply_unary(a, a.v * a.v, 2.0 * a.v, S(2.0));
}

} // namespace fepinn

#endif
