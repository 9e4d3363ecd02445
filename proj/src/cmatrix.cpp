#include "ddce/cmatrix.hpp"

#include <algorithm>
#include <cmath>

#include "ddce/errors.hpp"

namespace ddce {

CMatrix CMatrix::identity(int n) {
    CMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMatrix mul(const CMatrix& a, const CMatrix& b) {
    if (a.cols != b.rows) throw DimMismatch("mul: inner dimensions disagree");
    CMatrix c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        for (int k = 0; k < a.cols; ++k) {
            const cd aik = a(i, k);
            if (aik == cd{}) continue;
            for (int j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

CVector mul(const CMatrix& a, const CVector& x) {
    if (a.cols != static_cast<int>(x.size())) throw DimMismatch("mul: vector length disagrees");
    CVector y(a.rows);
    for (int i = 0; i < a.rows; ++i) {
        cd acc = 0.0;
        for (int j = 0; j < a.cols; ++j) acc += a(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

CMatrix adjoint(const CMatrix& a) {
    CMatrix c(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) c(j, i) = std::conj(a(i, j));
    return c;
}

CMatrix transpose(const CMatrix& a) {
    CMatrix c(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) c(j, i) = a(i, j);
    return c;
}

double max_abs(const CMatrix& a) {
    double m = 0.0;
    for (const cd& v : a.data) m = std::max(m, std::abs(v));
    return m;
}

bool is_hermitian(const CMatrix& a, double tol) {
    if (a.rows != a.cols) return false;
    const double bound = tol * std::max(1.0, max_abs(a));
    for (int i = 0; i < a.rows; ++i)
        for (int j = i; j < a.cols; ++j)
            if (std::abs(a(i, j) - std::conj(a(j, i))) > bound) return false;
    return true;
}

double default_jitter(const CMatrix& a) {
    double tr = 0.0;
    for (int i = 0; i < a.rows; ++i) tr += a(i, i).real();
    return a.rows > 0 ? 1e-10 * tr / a.rows : 0.0;
}

CMatrix cholesky(const CMatrix& a, double jitter) {
    if (a.rows != a.cols) throw BadDims("cholesky: matrix not square");
    const int n = a.rows;
    CMatrix l(n, n);
    for (int j = 0; j < n; ++j) {
        double d = a(j, j).real() + jitter;
        for (int k = 0; k < j; ++k) d -= std::norm(l(j, k));
        if (!(d > 0.0)) throw NotPositiveDefinite("cholesky: nonpositive pivot at row " + std::to_string(j));
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            cd s = a(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
            l(i, j) = s / ljj;
        }
    }
    return l;
}

namespace {

// Solves L*y = b then L^H*x = y in place, one column at a time.
void chol_solve_inplace(const CMatrix& l, CMatrix& b) {
    const int n = l.rows;
    for (int c = 0; c < b.cols; ++c) {
        for (int i = 0; i < n; ++i) {
            cd s = b(i, c);
            for (int k = 0; k < i; ++k) s -= l(i, k) * b(k, c);
            b(i, c) = s / l(i, i);
        }
        for (int i = n - 1; i >= 0; --i) {
            cd s = b(i, c);
            for (int k = i + 1; k < n; ++k) s -= std::conj(l(k, i)) * b(k, c);
            b(i, c) = s / l(i, i);
        }
    }
}

} // namespace

CMatrix hermitian_solve(const CMatrix& a, const CMatrix& b) {
    if (a.rows != b.rows) throw DimMismatch("hermitian_solve: row counts disagree");
    // Clean factorization first; fall back to escalating jitter only when
    // the matrix is numerically rank deficient (static-channel covariances
    // with zero noise).
    CMatrix l;
    double jitter = 0.0;
    for (int attempt = 0;; ++attempt) {
        try {
            l = cholesky(a, jitter);
            break;
        } catch (const NotPositiveDefinite&) {
            if (attempt >= 6) throw;
            jitter = jitter == 0.0 ? std::max(default_jitter(a), 1e-300) : jitter * 100.0;
        }
    }
    CMatrix x = b;
    chol_solve_inplace(l, x);
    return x;
}

CVector hermitian_solve(const CMatrix& a, const CVector& b) {
    CMatrix col(static_cast<int>(b.size()), 1);
    for (size_t i = 0; i < b.size(); ++i) col(static_cast<int>(i), 0) = b[i];
    CMatrix x = hermitian_solve(a, col);
    CVector out(b.size());
    for (size_t i = 0; i < b.size(); ++i) out[i] = x(static_cast<int>(i), 0);
    return out;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix c(a.rows * b.rows, a.cols * b.cols);
    for (int ia = 0; ia < a.rows; ++ia)
        for (int ja = 0; ja < a.cols; ++ja) {
            const cd v = a(ia, ja);
            if (v == cd{}) continue;
            for (int ib = 0; ib < b.rows; ++ib)
                for (int jb = 0; jb < b.cols; ++jb)
                    c(ia * b.rows + ib, ja * b.cols + jb) = v * b(ib, jb);
        }
    return c;
}

CMatrix block_diag(const std::vector<CMatrix>& blocks) {
    int r = 0, c = 0;
    for (const CMatrix& b : blocks) {
        r += b.rows;
        c += b.cols;
    }
    CMatrix m(r, c);
    int r0 = 0, c0 = 0;
    for (const CMatrix& b : blocks) {
        for (int i = 0; i < b.rows; ++i)
            for (int j = 0; j < b.cols; ++j) m(r0 + i, c0 + j) = b(i, j);
        r0 += b.rows;
        c0 += b.cols;
    }
    return m;
}

double logdet_hpd(const CMatrix& a) {
    CMatrix l = cholesky(a, 0.0);
    double s = 0.0;
    for (int i = 0; i < a.rows; ++i) s += std::log(l(i, i).real());
    return 2.0 * s;
}

} // namespace ddce
