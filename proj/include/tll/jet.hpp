#pragma once

// Truncated multivariate power series ("jets").  A jet is a sparse map from
// exponent multi-indices to coefficients, closed under ring/analytic
// operations that all truncate at the jet's order.  Values are immutable in
// the sense that every operation returns a fresh jet.
//
// Monomial keys pack up to 14 exponents into one uint64 (4 bits each) with
// the total degree in the top byte, so keys sort degree-major and key
// addition implements monomial multiplication without carries as long as the
// total order stays <= 15.  We cap orders at 12.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tll/scalars.hpp"

namespace tll {

inline constexpr int kMaxVars = 14;
inline constexpr int kMaxOrder = 12;

using MonoKey = std::uint64_t;

inline int mono_degree(MonoKey k) { return static_cast<int>(k >> 56); }

inline int mono_exp(MonoKey k, int var) {
    return static_cast<int>((k >> (4 * var)) & 0xF);
}

inline MonoKey mono_pack(const std::vector<int>& exps) {
    MonoKey k = 0;
    int deg = 0;
    for (std::size_t i = 0; i < exps.size(); ++i) {
        if (exps[i] < 0 || exps[i] > 15) throw std::invalid_argument("monomial exponent out of range");
        k |= static_cast<MonoKey>(exps[i]) << (4 * i);
        deg += exps[i];
    }
    if (deg > 15) throw std::invalid_argument("monomial degree out of range");
    return k | (static_cast<MonoKey>(deg) << 56);
}

inline std::vector<int> mono_unpack(MonoKey k, int nvars) {
    std::vector<int> e(nvars);
    for (int i = 0; i < nvars; ++i) e[i] = mono_exp(k, i);
    return e;
}

// Degree of a monomial restricted to the first `ext_vars` variables.
inline int mono_ext_degree(MonoKey k, int ext_vars) {
    int d = 0;
    for (int i = 0; i < ext_vars; ++i) d += mono_exp(k, i);
    return d;
}

// Optional anisotropic truncation used by the stationary-phase engine: keep
// total degree <= order while separately capping the degree in the leading
// block of "exterior" variables.
struct ExtCap {
    int ext_vars = 0;
    int ext_order = 0;
};

template <class S>
class JetT {
  public:
    using Scalar = S;
    using Term = std::pair<MonoKey, S>;

    JetT() : nv_(0), ord_(0) {}
    JetT(int nvars, int order) : nv_(nvars), ord_(order) {
        if (nvars < 0 || nvars > kMaxVars) throw std::invalid_argument("jet: variable count out of range");
        if (order < 0 || order > kMaxOrder) throw std::invalid_argument("jet: order out of range");
    }

    static JetT constant(int nvars, int order, const S& c) {
        JetT j(nvars, order);
        if (!scalar_ops<S>::is_zero(c)) j.t_.push_back({0, c});
        return j;
    }
    static JetT variable(int nvars, int order, int var, const S& coeff) {
        JetT j(nvars, order);
        if (var < 0 || var >= nvars) throw std::invalid_argument("jet: variable index out of range");
        if (order >= 1 && !scalar_ops<S>::is_zero(coeff))
            j.t_.push_back({(MonoKey(1) << 56) | (MonoKey(1) << (4 * var)), coeff});
        return j;
    }

    int num_vars() const { return nv_; }
    int order() const { return ord_; }
    const std::vector<Term>& terms() const { return t_; }
    bool empty() const { return t_.empty(); }

    S coeff_key(MonoKey k) const {
        auto it = std::lower_bound(t_.begin(), t_.end(), k,
                                   [](const Term& a, MonoKey b) { return a.first < b; });
        if (it != t_.end() && it->first == k) return it->second;
        return scalar_ops<S>::zero();
    }
    S coeff(const std::vector<int>& exps) const { return coeff_key(mono_pack(exps)); }
    S constant_term() const { return coeff_key(MonoKey(0)); }

    double max_abs() const {
        double m = 0;
        for (const auto& [k, v] : t_) m = std::max(m, scalar_ops<S>::abs(v));
        return m;
    }

    // Assemble from an unsorted term list; merges duplicates, drops zeros and
    // anything above the truncation order.
    static JetT from_terms(int nvars, int order, std::vector<Term>&& raw,
                           std::optional<ExtCap> cap = std::nullopt) {
        JetT j(nvars, order);
        std::sort(raw.begin(), raw.end(),
                  [](const Term& a, const Term& b) { return a.first < b.first; });
        for (auto& [k, v] : raw) {
            if (mono_degree(k) > order) continue;
            if (cap && mono_ext_degree(k, cap->ext_vars) > cap->ext_order) continue;
            if (!j.t_.empty() && j.t_.back().first == k)
                j.t_.back().second += v;
            else
                j.t_.push_back({k, std::move(v)});
        }
        std::erase_if(j.t_, [](const Term& t) { return scalar_ops<S>::is_zero(t.second); });
        return j;
    }

    JetT truncated(int order, std::optional<ExtCap> cap = std::nullopt) const {
        JetT j(nv_, std::min(order, ord_));
        for (const auto& [k, v] : t_) {
            if (mono_degree(k) > j.ord_) continue;
            if (cap && mono_ext_degree(k, cap->ext_vars) > cap->ext_order) continue;
            j.t_.push_back({k, v});
        }
        return j;
    }

    // Reinterpret in a larger variable space: variable i becomes var_map[i].
    JetT embedded(int new_nvars, const std::vector<int>& var_map) const {
        if (static_cast<int>(var_map.size()) != nv_)
            throw std::invalid_argument("jet embed: variable map size mismatch");
        JetT j(new_nvars, ord_);
        j.t_.reserve(t_.size());
        for (const auto& [k, v] : t_) {
            MonoKey nk = k & (MonoKey(0xFF) << 56);
            for (int i = 0; i < nv_; ++i)
                nk |= static_cast<MonoKey>(mono_exp(k, i)) << (4 * var_map[i]);
            j.t_.push_back({nk, v});
        }
        std::sort(j.t_.begin(), j.t_.end(),
                  [](const Term& a, const Term& b) { return a.first < b.first; });
        return j;
    }

    friend bool operator==(const JetT& a, const JetT& b) {
        return a.nv_ == b.nv_ && a.ord_ == b.ord_ && a.t_ == b.t_;
    }

  private:
    int nv_, ord_;
    std::vector<Term> t_;  // sorted by key (degree-major), zero-free

    template <class T>
    friend JetT<T> jet_add(const JetT<T>&, const JetT<T>&);
    template <class T>
    friend JetT<T> jet_scale(const JetT<T>&, const T&);
    template <class T>
    friend JetT<T> jet_mul(const JetT<T>&, const JetT<T>&, std::optional<ExtCap>);
    template <class T>
    friend JetT<T> jet_diff(const JetT<T>&, int);
};

template <class S>
void check_same_space(const JetT<S>& a, const JetT<S>& b, const char* op) {
    if (a.num_vars() != b.num_vars())
        throw std::invalid_argument(std::string(op) + ": jets live in different variable spaces");
}

template <class S>
JetT<S> jet_add(const JetT<S>& a, const JetT<S>& b) {
    check_same_space(a, b, "jet_add");
    JetT<S> r(a.num_vars(), std::min(a.order(), b.order()));
    auto ia = a.t_.begin(), ib = b.t_.begin();
    while (ia != a.t_.end() || ib != b.t_.end()) {
        if (ib == b.t_.end() || (ia != a.t_.end() && ia->first < ib->first)) {
            if (mono_degree(ia->first) <= r.order()) r.t_.push_back(*ia);
            ++ia;
        } else if (ia == a.t_.end() || ib->first < ia->first) {
            if (mono_degree(ib->first) <= r.order()) r.t_.push_back(*ib);
            ++ib;
        } else {
            S s = ia->second + ib->second;
            if (!scalar_ops<S>::is_zero(s) && mono_degree(ia->first) <= r.order())
                r.t_.push_back({ia->first, s});
            ++ia, ++ib;
        }
    }
    return r;
}

template <class S>
JetT<S> jet_scale(const JetT<S>& a, const S& c) {
    JetT<S> r(a.num_vars(), a.order());
    if (scalar_ops<S>::is_zero(c)) return r;
    r.t_ = a.t_;
    for (auto& [k, v] : r.t_) v *= c;
    std::erase_if(r.t_, [](const auto& t) { return scalar_ops<S>::is_zero(t.second); });
    return r;
}

template <class S>
JetT<S> jet_neg(const JetT<S>& a) {
    return jet_scale(a, -scalar_ops<S>::one());
}

template <class S>
JetT<S> jet_sub(const JetT<S>& a, const JetT<S>& b) {
    return jet_add(a, jet_neg(b));
}

template <class S>
JetT<S> jet_mul(const JetT<S>& a, const JetT<S>& b, std::optional<ExtCap> cap = std::nullopt) {
    check_same_space(a, b, "jet_mul");
    int ord = std::min(a.order(), b.order());
    std::vector<typename JetT<S>::Term> raw;
    raw.reserve(a.t_.size() * 2 + b.t_.size());
    for (const auto& [ka, va] : a.t_) {
        int da = mono_degree(ka);
        if (da > ord) break;  // degree-major order
        for (const auto& [kb, vb] : b.t_) {
            if (da + mono_degree(kb) > ord) break;
            raw.push_back({ka + kb, va * vb});
        }
    }
    return JetT<S>::from_terms(a.num_vars(), ord, std::move(raw), cap);
}

template <class S>
JetT<S> jet_pow(const JetT<S>& a, int n, std::optional<ExtCap> cap = std::nullopt) {
    JetT<S> r = JetT<S>::constant(a.num_vars(), a.order(), scalar_ops<S>::one());
    for (int i = 0; i < n; ++i) r = jet_mul(r, a, cap);
    return r;
}

// Substitute: result(x) = f(g_0(x), ..., g_{m-1}(x)).  The inner jets must
// share a variable space and have zero constant terms (recenter first).
template <class S>
JetT<S> jet_compose(const JetT<S>& f, const std::vector<JetT<S>>& args,
                    std::optional<ExtCap> cap = std::nullopt) {
    if (static_cast<int>(args.size()) != f.num_vars())
        throw std::invalid_argument("jet_compose: argument count does not match outer variable count");
    int ord = f.order();
    int nv = 0;
    for (const auto& g : args) {
        if (!scalar_ops<S>::is_zero(g.constant_term()))
            throw std::invalid_argument("jet_compose: inner jet has nonzero constant term; recenter first");
        nv = g.num_vars();
        ord = std::min(ord, g.order());
    }
    if (f.num_vars() == 0) {
        JetT<S> r = JetT<S>::constant(nv, ord, f.constant_term());
        return r;
    }
    for (const auto& g : args)
        if (g.num_vars() != nv) throw std::invalid_argument("jet_compose: inner jets disagree on variable space");

    // Power cache per argument; inner jets have valuation >= 1, so powers
    // beyond the order vanish.
    std::vector<std::vector<JetT<S>>> pows(args.size());
    for (std::size_t i = 0; i < args.size(); ++i)
        pows[i].push_back(JetT<S>::constant(nv, ord, scalar_ops<S>::one()));
    auto power = [&](std::size_t i, int e) -> const JetT<S>& {
        while (static_cast<int>(pows[i].size()) <= e)
            pows[i].push_back(jet_mul(pows[i].back(), args[i].truncated(ord), cap));
        return pows[i][e];
    };

    JetT<S> acc(nv, ord);
    for (const auto& [k, c] : f.terms()) {
        if (mono_degree(k) > ord) break;
        JetT<S> m = JetT<S>::constant(nv, ord, c);
        for (int i = 0; i < f.num_vars(); ++i) {
            int e = mono_exp(k, i);
            if (e > 0) m = jet_mul(m, power(i, e), cap);
        }
        acc = jet_add(acc, m);
    }
    return acc;
}

template <class S>
JetT<S> jet_diff(const JetT<S>& a, int var) {
    if (var < 0 || var >= a.num_vars()) throw std::invalid_argument("jet_diff: variable index out of range");
    if (a.order() == 0) return JetT<S>(a.num_vars(), 0);
    JetT<S> r(a.num_vars(), a.order() - 1);
    for (const auto& [k, v] : a.t_) {
        int e = mono_exp(k, var);
        if (e == 0) continue;
        MonoKey nk = k - (MonoKey(1) << (4 * var)) - (MonoKey(1) << 56);
        if (mono_degree(nk) > r.order()) continue;
        r.t_.push_back({nk, v * scalar_ops<S>::from_int(e)});
    }
    return r;  // sorted order is preserved by the uniform key shift within each degree
}

template <class S>
S jet_eval(const JetT<S>& a, const std::vector<S>& x) {
    if (static_cast<int>(x.size()) != a.num_vars())
        throw std::invalid_argument("jet_eval: point dimension mismatch");
    S acc = scalar_ops<S>::zero();
    for (const auto& [k, v] : a.terms()) {
        S m = v;
        for (int i = 0; i < a.num_vars(); ++i)
            for (int e = 0; e < mono_exp(k, i); ++e) m *= x[i];
        acc += m;
    }
    return acc;
}

// Complex-conjugate the coefficients (the variables stay real).
template <class S>
JetT<S> jet_conj(const JetT<S>& a) {
    std::vector<std::pair<MonoKey, S>> out;
    out.reserve(a.terms().size());
    for (const auto& [k, v] : a.terms()) out.push_back({k, scalar_ops<S>::conj(v)});
    return JetT<S>::from_terms(a.num_vars(), a.order(), std::move(out));
}

// Drop every term that involves the given variable (restrict it to zero).
template <class S>
JetT<S> jet_set_var_zero(const JetT<S>& a, int var) {
    if (var < 0 || var >= a.num_vars()) throw std::invalid_argument("jet_set_var_zero: variable index out of range");
    std::vector<std::pair<MonoKey, S>> out;
    for (const auto& [k, v] : a.terms())
        if (mono_exp(k, var) == 0) out.push_back({k, v});
    return JetT<S>::from_terms(a.num_vars(), a.order(), std::move(out));
}

// Substitute x_var -> x_var + s.  The shift jet s must live in the same
// variable space and must not depend on x_var itself.
template <class S>
JetT<S> jet_shift_var(const JetT<S>& a, int var, const JetT<S>& s,
                      std::optional<ExtCap> cap = std::nullopt) {
    check_same_space(a, s, "jet_shift_var");
    if (var < 0 || var >= a.num_vars()) throw std::invalid_argument("jet_shift_var: variable index out of range");
    for (const auto& [k, v] : s.terms())
        if (mono_exp(k, var) != 0)
            throw std::invalid_argument("jet_shift_var: shift depends on the shifted variable");
    // The shift is an exact polynomial: a lower recorded order must not drag
    // the result down through the min-order product rule.
    JetT<S> s_at;
    const JetT<S>& sref = [&]() -> const JetT<S>& {
        if (s.order() == a.order()) return s;
        std::vector<std::pair<MonoKey, S>> st(s.terms().begin(), s.terms().end());
        s_at = JetT<S>::from_terms(s.num_vars(), a.order(), std::move(st), cap);
        return s_at;
    }();

    // Bucket the terms of a by their exponent in x_var, with that factor removed.
    std::vector<std::vector<std::pair<MonoKey, S>>> bucket;
    for (const auto& [k, v] : a.terms()) {
        int e = mono_exp(k, var);
        if (static_cast<int>(bucket.size()) <= e) bucket.resize(e + 1);
        MonoKey stripped = k - (MonoKey(e) << (4 * var)) - (MonoKey(e) << 56);
        bucket[e].push_back({stripped, v});
    }

    std::vector<JetT<S>> s_pow{JetT<S>::constant(a.num_vars(), a.order(), scalar_ops<S>::one())};
    auto spower = [&](int e) -> const JetT<S>& {
        while (static_cast<int>(s_pow.size()) <= e) s_pow.push_back(jet_mul(s_pow.back(), sref, cap));
        return s_pow[e];
    };
    auto mono_shifted = [&](JetT<S> f, int i) {  // multiply by x_var^i
        std::vector<std::pair<MonoKey, S>> out;
        for (const auto& [k, v] : f.terms()) {
            if (mono_exp(k, var) + i > 15) throw std::overflow_error("jet_shift_var: exponent overflow");
            MonoKey nk = k + (MonoKey(i) << (4 * var)) + (MonoKey(i) << 56);
            out.push_back({nk, v});
        }
        return JetT<S>::from_terms(f.num_vars(), f.order(), std::move(out), cap);
    };

    JetT<S> acc(a.num_vars(), a.order());
    for (int e = 0; e < static_cast<int>(bucket.size()); ++e) {
        if (bucket[e].empty()) continue;
        JetT<S> fe = JetT<S>::from_terms(a.num_vars(), a.order(), std::move(bucket[e]));
        // (x + s)^e = sum_i C(e,i) x^i s^(e-i)
        long long binom = 1;
        for (int i = 0; i <= e; ++i) {
            if (i > 0) binom = binom * (e - i + 1) / i;
            JetT<S> piece = jet_mul(fe, spower(e - i), cap);
            piece = jet_scale(mono_shifted(piece, i), scalar_ops<S>::from_int(binom));
            acc = jet_add(acc, piece);
        }
    }
    return acc;
}

// Collect the terms whose exponents on the tail block (variables >= n_head)
// match tail_exps exactly, and return them as a jet in the head variables.
template <class S>
JetT<S> jet_tail_coeff(const JetT<S>& a, int n_head, const std::vector<int>& tail_exps) {
    if (n_head < 0 || n_head + static_cast<int>(tail_exps.size()) != a.num_vars())
        throw std::invalid_argument("jet_tail_coeff: head/tail split does not cover the variable space");
    int tail_deg = 0;
    for (int e : tail_exps) tail_deg += e;
    std::vector<std::pair<MonoKey, S>> out;
    for (const auto& [k, v] : a.terms()) {
        bool match = true;
        for (std::size_t j = 0; j < tail_exps.size(); ++j)
            if (mono_exp(k, n_head + static_cast<int>(j)) != tail_exps[j]) { match = false; break; }
        if (!match) continue;
        MonoKey nk = k - (MonoKey(tail_deg) << 56);
        for (std::size_t j = 0; j < tail_exps.size(); ++j)
            nk -= MonoKey(tail_exps[j]) << (4 * (n_head + static_cast<int>(j)));
        out.push_back({nk, v});
    }
    return JetT<S>::from_terms(n_head, a.order(), std::move(out));
}

// Reinterpret a jet with no tail dependence as a jet in the head variables.
template <class S>
JetT<S> jet_head_restrict(const JetT<S>& a, int n_head) {
    for (const auto& [k, v] : a.terms()) {
        (void)v;
        for (int j = n_head; j < a.num_vars(); ++j)
            if (mono_exp(k, j) != 0)
                throw std::invalid_argument("jet_head_restrict: jet depends on a tail variable");
    }
    std::vector<std::pair<MonoKey, S>> out(a.terms().begin(), a.terms().end());
    return JetT<S>::from_terms(n_head, a.order(), std::move(out));
}

namespace detail {
// Shared series helper: given u with valuation >= 1 and coefficients c_k,
// return sum c_k u^k truncated at the jet order.
template <class S>
JetT<S> valuation_series(const JetT<S>& u, const std::vector<S>& coeffs) {
    JetT<S> acc = JetT<S>::constant(u.num_vars(), u.order(), coeffs.empty() ? scalar_ops<S>::zero() : coeffs[0]);
    JetT<S> p = JetT<S>::constant(u.num_vars(), u.order(), scalar_ops<S>::one());
    for (std::size_t k = 1; k < coeffs.size(); ++k) {
        p = jet_mul(p, u);
        if (p.empty()) break;
        acc = jet_add(acc, jet_scale(p, coeffs[k]));
    }
    return acc;
}

template <class S>
JetT<S> split_unit(const JetT<S>& a, S& c, const char* op) {
    c = a.constant_term();
    if (scalar_ops<S>::is_zero(c))
        throw std::domain_error(std::string(op) + ": zero constant term");
    return jet_sub(a, JetT<S>::constant(a.num_vars(), a.order(), c));
}
}  // namespace detail

template <class S>
JetT<S> jet_invert(const JetT<S>& a) {
    S c;
    JetT<S> u = detail::split_unit(a, c, "jet_invert");
    S inv_c = scalar_ops<S>::one() / c;
    // 1/(c+u) = (1/c) sum (-u/c)^k
    std::vector<S> coeffs(a.order() + 1);
    S w = inv_c;
    for (int k = 0; k <= a.order(); ++k) {
        coeffs[k] = w;
        w = -(w * inv_c);
    }
    return detail::valuation_series(u, coeffs);
}

template <class S>
JetT<S> jet_sqrt(const JetT<S>& a) {
    S c;
    JetT<S> u = detail::split_unit(a, c, "jet_sqrt");
    S rc = scalar_ops<S>::sqrt(c);  // principal branch / exact-mode restriction
    S inv_c = scalar_ops<S>::one() / c;
    // sqrt(c) * sum binom(1/2, k) (u/c)^k; the binomials build up exactly as
    // b_k = b_{k-1} (3 - 2k) / (2k).
    std::vector<S> coeffs(a.order() + 1);
    S b = scalar_ops<S>::one();
    S cpow = scalar_ops<S>::one();
    for (int k = 0; k <= a.order(); ++k) {
        coeffs[k] = rc * b * cpow;
        cpow = cpow * inv_c;
        b = scalar_ops<S>::div_int(b * scalar_ops<S>::from_int(3 - 2 * (k + 1)), 2 * (k + 1));
    }
    return detail::valuation_series(u, coeffs);
}

template <class S>
JetT<S> jet_log(const JetT<S>& a) {
    S c;
    JetT<S> u = detail::split_unit(a, c, "jet_log");
    S lc = scalar_ops<S>::log(c);
    S inv_c = scalar_ops<S>::one() / c;
    std::vector<S> coeffs(a.order() + 1);
    coeffs[0] = lc;
    S cpow = inv_c;
    for (int k = 1; k <= a.order(); ++k) {
        S term = scalar_ops<S>::div_int(cpow, k);
        coeffs[k] = (k % 2 == 1) ? term : -term;
        cpow = cpow * inv_c;
    }
    return detail::valuation_series(u, coeffs);
}

template <class S>
JetT<S> jet_exp(const JetT<S>& a) {
    S c = a.constant_term();
    JetT<S> u = jet_sub(a, JetT<S>::constant(a.num_vars(), a.order(), c));
    S ec = scalar_ops<S>::exp(c);
    std::vector<S> coeffs(a.order() + 1);
    S f = scalar_ops<S>::one();
    for (int k = 0; k <= a.order(); ++k) {
        if (k > 0) f = scalar_ops<S>::div_int(f, k);
        coeffs[k] = ec * f;
    }
    return detail::valuation_series(u, coeffs);
}

using Jet = JetT<Complex>;
using JetQ = JetT<ComplexRational>;

inline Jet to_float(const JetQ& q) {
    std::vector<Jet::Term> raw;
    raw.reserve(q.terms().size());
    for (const auto& [k, v] : q.terms()) raw.push_back({k, v.to_complex()});
    return Jet::from_terms(q.num_vars(), q.order(), std::move(raw));
}

// Max coefficient-wise distance on the common truncation order.
template <class S>
double jet_distance(const JetT<S>& a, const JetT<S>& b) {
    return jet_sub(a.truncated(std::min(a.order(), b.order())),
                   b.truncated(std::min(a.order(), b.order())))
        .max_abs();
}

}  // namespace tll
