#ifndef TWOBEAM_HILBERT_HPP
#define TWOBEAM_HILBERT_HPP

// Minimal dense complex linear algebra for small finite-dimensional state
// spaces (dim <= 8 in practice).  Values are immutable after construction
// and safe to share across threads.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "twobeam/errors.hpp"

namespace twobeam {

using Complex = std::complex<double>;

// A ket with named basis directions.  Labels travel with the amplitudes and
// are checked on every binary operation; this catches basis-order mistakes
// between evolution stages at the call site instead of as silent wrong
// numbers.
struct StateVector {
    std::vector<std::string> labels;
    std::vector<Complex> amps;

    std::size_t dim() const { return amps.size(); }

    double norm2() const {
        double s = 0.0;
        for (const Complex& a : amps) s += std::norm(a);
        return s;
    }
    double norm() const { return std::sqrt(norm2()); }
};

enum class OpKind { general, unitary, projector };

// Dense square matrix, row-major.
struct Operator {
    std::size_t dim = 0;
    std::vector<Complex> m; // dim*dim entries
    OpKind kind = OpKind::general;

    Complex& at(std::size_t r, std::size_t c) { return m[r * dim + c]; }
    const Complex& at(std::size_t r, std::size_t c) const { return m[r * dim + c]; }

    static Operator zero(std::size_t n) {
        return Operator{n, std::vector<Complex>(n * n, Complex{0.0, 0.0}), OpKind::general};
    }
    static Operator identity(std::size_t n) {
        Operator op = zero(n);
        for (std::size_t i = 0; i < n; ++i) op.at(i, i) = 1.0;
        op.kind = OpKind::projector; // I is a (trivial) projector and unitary
        return op;
    }
};

inline void require_same_basis(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim())
        throw DimensionMismatch("state dimensions differ: " + std::to_string(a.dim()) +
                                " vs " + std::to_string(b.dim()));
    if (a.labels != b.labels)
        throw DimensionMismatch("basis labels differ between operands");
}

// <a|b>, conjugating the first argument.
inline Complex inner(const StateVector& a, const StateVector& b) {
    require_same_basis(a, b);
    Complex s{0.0, 0.0};
    for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a.amps[i]) * b.amps[i];
    return s;
}

inline StateVector apply(const Operator& op, const StateVector& s) {
    if (op.dim != s.dim())
        throw DimensionMismatch("operator dim " + std::to_string(op.dim) +
                                " does not match state dim " + std::to_string(s.dim()));
    StateVector out{s.labels, std::vector<Complex>(s.dim(), Complex{0.0, 0.0})};
    for (std::size_t r = 0; r < op.dim; ++r) {
        Complex acc{0.0, 0.0};
        for (std::size_t c = 0; c < op.dim; ++c) acc += op.at(r, c) * s.amps[c];
        out.amps[r] = acc;
    }
    return out;
}

inline Operator multiply(const Operator& a, const Operator& b) {
    if (a.dim != b.dim) throw DimensionMismatch("operator dimensions differ");
    Operator out = Operator::zero(a.dim);
    for (std::size_t r = 0; r < a.dim; ++r)
        for (std::size_t k = 0; k < a.dim; ++k) {
            const Complex ark = a.at(r, k);
            if (ark == Complex{0.0, 0.0}) continue;
            for (std::size_t c = 0; c < a.dim; ++c) out.at(r, c) += ark * b.at(k, c);
        }
    return out;
}

inline Operator adjoint(const Operator& op) {
    Operator out = Operator::zero(op.dim);
    for (std::size_t r = 0; r < op.dim; ++r)
        for (std::size_t c = 0; c < op.dim; ++c) out.at(r, c) = std::conj(op.at(c, r));
    return out;
}

inline double max_abs_diff(const Operator& a, const Operator& b) {
    double mx = 0.0;
    for (std::size_t i = 0; i < a.m.size(); ++i) mx = std::max(mx, std::abs(a.m[i] - b.m[i]));
    return mx;
}

// max |(U^dag U - I)_{rc}|
inline bool check_unitary(const Operator& op, double tol) {
    const Operator prod = multiply(adjoint(op), op);
    return max_abs_diff(prod, Operator::identity(op.dim)) < tol;
}

inline bool check_projector(const Operator& op, double tol) {
    return max_abs_diff(op, adjoint(op)) < tol && max_abs_diff(multiply(op, op), op) < tol;
}

// |s><s|.  Requires s normalized; a rank-1 projector from an unnormalized
// vector would silently break every weight downstream.
inline Operator projector_from(const StateVector& s) {
    const double n = s.norm();
    if (std::abs(n - 1.0) > 1e-9)
        throw NotNormalized("projector_from requires a normalized state, got norm " +
                            std::to_string(n));
    Operator op = Operator::zero(s.dim());
    for (std::size_t r = 0; r < s.dim(); ++r)
        for (std::size_t c = 0; c < s.dim(); ++c)
            op.at(r, c) = s.amps[r] * std::conj(s.amps[c]);
    op.kind = OpKind::projector;
    return op;
}

inline Operator complement_projector(const Operator& p) {
    Operator out = Operator::identity(p.dim);
    for (std::size_t i = 0; i < p.m.size(); ++i) out.m[i] -= p.m[i];
    out.kind = OpKind::projector;
    return out;
}

inline Complex trace(const Operator& op) {
    Complex t{0.0, 0.0};
    for (std::size_t i = 0; i < op.dim; ++i) t += op.at(i, i);
    return t;
}

// How the unconstrained columns of a partially specified unitary are filled
// in.  Either scheme yields a valid unitary; quantities that depend only on
// the constrained subspace must agree between them.
enum class CompletionScheme { lexicographic, reversed_phased };

// Build a full unitary from a partial isometry given as (input basis index ->
// image vector) constraints.  Image vectors must be orthonormal.  Remaining
// columns are filled deterministically by Gram-Schmidt over the standard
// basis: ascending candidate order for `lexicographic`; descending order with
// a fixed phase twist per column for `reversed_phased`.
inline Operator complete_unitary(std::size_t dim,
                                 const std::vector<std::pair<std::size_t, std::vector<Complex>>>& constraints,
                                 CompletionScheme scheme = CompletionScheme::lexicographic) {
    std::vector<std::vector<Complex>> used;
    Operator u = Operator::zero(dim);
    std::vector<bool> has_col(dim, false);

    for (const auto& [col, img] : constraints) {
        if (col >= dim || img.size() != dim)
            throw DimensionMismatch("completion constraint does not match dimension");
        for (const auto& prev : used) {
            Complex ov{0.0, 0.0};
            for (std::size_t i = 0; i < dim; ++i) ov += std::conj(prev[i]) * img[i];
            if (std::abs(ov) > 1e-12)
                throw NotNormalized("completion constraint images are not orthogonal");
        }
        double n2 = 0.0;
        for (const Complex& a : img) n2 += std::norm(a);
        if (std::abs(n2 - 1.0) > 1e-12)
            throw NotNormalized("completion constraint image is not normalized");
        for (std::size_t r = 0; r < dim; ++r) u.at(r, col) = img[r];
        has_col[col] = true;
        used.push_back(img);
    }

    std::vector<std::size_t> free_cols;
    for (std::size_t j = 0; j < dim; ++j)
        if (!has_col[j]) free_cols.push_back(j);

    const bool reversed = scheme == CompletionScheme::reversed_phased;
    if (reversed) std::reverse(free_cols.begin(), free_cols.end());

    std::size_t cand = 0;
    for (std::size_t jn = 0; jn < free_cols.size(); ++jn) {
        std::vector<Complex> v;
        while (true) {
            const std::size_t k = reversed ? dim - 1 - cand : cand;
            ++cand;
            v.assign(dim, Complex{0.0, 0.0});
            v[k] = 1.0;
            for (const auto& prev : used) {
                Complex ov{0.0, 0.0};
                for (std::size_t i = 0; i < dim; ++i) ov += std::conj(prev[i]) * v[i];
                for (std::size_t i = 0; i < dim; ++i) v[i] -= ov * prev[i];
            }
            double n2 = 0.0;
            for (const Complex& a : v) n2 += std::norm(a);
            if (n2 > 0.25) { // candidate survived projection
                const double n = std::sqrt(n2);
                const Complex phase =
                    reversed ? std::polar(1.0, 0.7 * static_cast<double>(jn + 1)) : Complex{1.0, 0.0};
                for (Complex& a : v) a = a / n * phase;
                break;
            }
        }
        for (std::size_t r = 0; r < dim; ++r) u.at(r, free_cols[jn]) = v[r];
        used.push_back(v);
    }
    u.kind = OpKind::unitary;
    return u;
}

} // namespace twobeam

#endif
