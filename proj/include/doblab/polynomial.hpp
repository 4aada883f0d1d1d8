#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "doblab/error.hpp"

namespace doblab {

/**
 * Real polynomial with coefficients stored highest degree first.
 *
 * Leading zeros are trimmed on construction, so the leading coefficient is
 * nonzero unless the polynomial is identically zero (stored as [0]).
 */
template <typename Scalar>
class Polynomial {
public:
    using Coeffs  = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Complex = std::complex<Scalar>;

    Polynomial() : coeffs_(Coeffs::Zero(1)) {}
    explicit Polynomial(const Coeffs& coeffs) { assign(coeffs); }
    Polynomial(std::initializer_list<Scalar> coeffs) {
        Coeffs c(static_cast<Eigen::Index>(coeffs.size()));
        std::copy(coeffs.begin(), coeffs.end(), c.data());
        assign(c);
    }

    static Polynomial constant(Scalar value) { return Polynomial{value}; }

    /// Monic product of (x - r_i) scaled by gain; imaginary residue is dropped.
    static Polynomial from_roots(std::span<const Complex> roots, Scalar gain = Scalar(1)) {
        std::vector<Complex> acc{Complex(1)};
        for (const Complex& r : roots) {
            std::vector<Complex> next(acc.size() + 1, Complex(0));
            for (std::size_t i = 0; i < acc.size(); ++i) {
                next[i] += acc[i];
                next[i + 1] -= acc[i] * r;
            }
            acc = std::move(next);
        }
        Coeffs c(static_cast<Eigen::Index>(acc.size()));
        for (std::size_t i = 0; i < acc.size(); ++i) c[static_cast<Eigen::Index>(i)] = gain * acc[i].real();
        return Polynomial(c);
    }

    const Coeffs& coeffs() const { return coeffs_; }
    Eigen::Index degree() const { return coeffs_.size() - 1; }
    bool is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == Scalar(0); }
    Scalar leading() const { return coeffs_[0]; }

    /// Coefficient of x^power (zero beyond the degree).
    Scalar coeff(Eigen::Index power) const {
        if (power < 0 || power > degree()) return Scalar(0);
        return coeffs_[degree() - power];
    }

    Scalar max_abs_coeff() const { return coeffs_.cwiseAbs().maxCoeff(); }

    /// Sum |c_i| r^i, the natural scale for residuals of evaluations at |x| = r.
    Scalar abs_bound(Scalar r) const {
        Scalar acc(0);
        for (Eigen::Index i = 0; i < coeffs_.size(); ++i) acc = acc * r + std::abs(coeffs_[i]);
        return acc;
    }

    /// Horner evaluation; T may be Scalar or std::complex<Scalar>.
    template <typename T>
    T operator()(const T& x) const {
        T acc(coeffs_[0]);
        for (Eigen::Index i = 1; i < coeffs_.size(); ++i) acc = acc * x + T(coeffs_[i]);
        return acc;
    }

    Polynomial derivative() const {
        if (degree() == 0) return Polynomial();
        Coeffs d(degree());
        for (Eigen::Index i = 0; i < degree(); ++i) d[i] = coeffs_[i] * Scalar(degree() - i);
        return Polynomial(d);
    }

    Polynomial operator-() const { return Polynomial(Coeffs(-coeffs_)); }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        const Eigen::Index n = std::max(a.coeffs_.size(), b.coeffs_.size());
        Coeffs c = Coeffs::Zero(n);
        c.tail(a.coeffs_.size()) += a.coeffs_;
        c.tail(b.coeffs_.size()) += b.coeffs_;
        return Polynomial(c);
    }

    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        Coeffs c = Coeffs::Zero(a.coeffs_.size() + b.coeffs_.size() - 1);
        for (Eigen::Index i = 0; i < a.coeffs_.size(); ++i)
            c.segment(i, b.coeffs_.size()) += a.coeffs_[i] * b.coeffs_;
        return Polynomial(c);
    }

    friend Polynomial operator*(Scalar s, const Polynomial& p) { return Polynomial(Coeffs(s * p.coeffs_)); }
    friend Polynomial operator*(const Polynomial& p, Scalar s) { return s * p; }

    friend bool operator==(const Polynomial& a, const Polynomial& b) {
        return a.coeffs_.size() == b.coeffs_.size() && a.coeffs_ == b.coeffs_;
    }

    /// p^n for small non-negative n.
    Polynomial pow(int n) const {
        Polynomial acc = constant(Scalar(1));
        for (int i = 0; i < n; ++i) acc = acc * *this;
        return acc;
    }

private:
    void assign(const Coeffs& c) {
        Eigen::Index first = 0;
        while (first < c.size() - 1 && c[first] == Scalar(0)) ++first;
        if (c.size() == 0) {
            coeffs_ = Coeffs::Zero(1);
        } else {
            coeffs_ = c.tail(c.size() - first);
        }
    }

    Coeffs coeffs_;
};

using Polynomiald = Polynomial<double>;

/// Quotient and remainder of a / b; b must not be zero.
template <typename Scalar>
std::pair<Polynomial<Scalar>, Polynomial<Scalar>> divmod(const Polynomial<Scalar>& a, const Polynomial<Scalar>& b) {
    using Coeffs = typename Polynomial<Scalar>::Coeffs;
    if (b.is_zero()) throw Error("polynomial division by zero");
    if (a.degree() < b.degree()) return {Polynomial<Scalar>(), a};
    Coeffs rem = a.coeffs();
    const Eigen::Index nq = a.degree() - b.degree() + 1;
    Coeffs quot(nq);
    for (Eigen::Index i = 0; i < nq; ++i) {
        const Scalar q = rem[i] / b.leading();
        quot[i] = q;
        rem.segment(i, b.coeffs().size()) -= q * b.coeffs();
        rem[i] = Scalar(0);
    }
    const Eigen::Index nr = std::max<Eigen::Index>(b.degree(), 1);
    return {Polynomial<Scalar>(quot), Polynomial<Scalar>(Coeffs(rem.tail(nr)))};
}

namespace detail {

// Radix-2 diagonal similarity balancing (Parlett-Reinsch). Exact in floating point.
template <typename Matrix>
void balance(Matrix& a) {
    using Scalar = typename Matrix::Scalar;
    const Scalar radix(2);
    const Scalar radix2 = radix * radix;
    bool done = false;
    while (!done) {
        done = true;
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            Scalar c = a.col(i).cwiseAbs().sum() - std::abs(a(i, i));
            Scalar r = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
            if (c == Scalar(0) || r == Scalar(0)) continue;
            const Scalar s = c + r;
            Scalar f(1);
            Scalar g = r / radix;
            while (c < g) {
                f *= radix;
                c *= radix2;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= radix2;
            }
            if ((c + r) / f < Scalar(0.95) * s) {
                done = false;
                a.row(i) /= f;
                a.col(i) *= f;
            }
        }
    }
}

template <typename Scalar>
bool complex_less(const std::complex<Scalar>& a, const std::complex<Scalar>& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

} // namespace detail

/**
 * All roots of p with multiplicity, via eigenvalues of the balanced companion
 * matrix followed by residual-guarded Newton polishing. Results are sorted by
 * real part, then imaginary part; conjugate pairs are exact conjugates.
 */
template <typename Scalar>
std::vector<std::complex<Scalar>> roots(const Polynomial<Scalar>& p) {
    using Complex = std::complex<Scalar>;
    using Matrix  = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (p.is_zero()) throw Error("undefined roots: zero polynomial");

    std::vector<Complex> out;
    const auto& c = p.coeffs();
    Eigen::Index n = p.degree();
    while (n > 0 && c[n] == Scalar(0)) {
        out.emplace_back(Scalar(0));
        --n;
    }
    if (n == 1) {
        out.emplace_back(-c[1] / c[0]);
    } else if (n > 1) {
        // Monic coefficients a_1..a_n, then x = z / sigma with sigma a power of two
        // near the geometric mean root magnitude.
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> a = c.segment(1, n) / c[0];
        const Scalar mean_mag = std::pow(std::abs(a[n - 1]), Scalar(1) / Scalar(n));
        const Scalar sigma = std::exp2(std::round(std::log2(mean_mag)));
        Scalar scale(1);
        for (Eigen::Index i = 0; i < n; ++i) {
            scale *= sigma;
            a[i] /= scale;
        }
        Matrix companion = Matrix::Zero(n, n);
        companion.row(0) = -a.transpose();
        companion.diagonal(-1).setOnes();
        detail::balance(companion);

        Eigen::EigenSolver<Matrix> solver(companion, false);
        if (solver.info() != Eigen::Success) throw Error("companion eigenvalue iteration did not converge");

        const Polynomial<Scalar> dp = p.derivative();
        auto polish = [&](Complex r) {
            Scalar res = std::abs(p(r));
            for (int it = 0; it < 4 && res > Scalar(0); ++it) {
                const Complex d = dp(r);
                if (d == Complex(0)) break;
                const Complex next = r - p(r) / d;
                const Scalar next_res = std::abs(p(next));
                if (!(next_res < res)) break;
                r = next;
                res = next_res;
            }
            return r;
        };
        for (Eigen::Index i = 0; i < n; ++i) {
            const Complex ev = solver.eigenvalues()[i] * sigma;
            if (ev.imag() == Scalar(0)) {
                out.push_back(polish(ev));
            } else if (ev.imag() > Scalar(0)) {
                const Complex r = polish(ev);
                if (r.imag() == Scalar(0)) {
                    // polished onto the real axis; keep the unpolished pair
                    out.push_back(ev);
                    out.push_back(std::conj(ev));
                } else {
                    out.push_back(Complex(r.real(), std::abs(r.imag())));
                    out.push_back(Complex(r.real(), -std::abs(r.imag())));
                }
            }
        }
    }
    std::sort(out.begin(), out.end(), detail::complex_less<Scalar>);
    return out;
}

} // namespace doblab
