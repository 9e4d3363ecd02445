// Dense complex matrix/vector kernel: Hermitian solves, Cholesky, Kronecker
// and block-diagonal assembly, log-determinant. Everything the estimators
// touch is small (tens of rows), so storage is plain row-major double
// precision with no blocking.
#ifndef DDCE_CMATRIX_HPP
#define DDCE_CMATRIX_HPP

#include <complex>
#include <vector>

namespace ddce {

using cd = std::complex<double>;
using CVector = std::vector<cd>;

struct CMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<cd> data; // row-major, data.size() == rows*cols

    CMatrix() = default;
    CMatrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c) {}

    cd& operator()(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    const cd& operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

    static CMatrix identity(int n);
    static CMatrix zeros(int r, int c) { return CMatrix(r, c); }
};

CMatrix mul(const CMatrix& a, const CMatrix& b);
CVector mul(const CMatrix& a, const CVector& x);
CMatrix adjoint(const CMatrix& a);
CMatrix transpose(const CMatrix& a);

// Largest entry magnitude (max norm).
double max_abs(const CMatrix& a);

bool is_hermitian(const CMatrix& a, double tol = 1e-12);

// Lower-triangular L with L*L^H = a + jitter*I. Throws NotPositiveDefinite
// when a pivot is not strictly positive after the jitter; callers that can
// tolerate rank deficiency retry with a larger jitter.
CMatrix cholesky(const CMatrix& a, double jitter = 0.0);

// Scale for default jitter: 1e-10 * trace(a)/dim. Rank-deficient correlation
// matrices (static channels) need it to factor at all.
double default_jitter(const CMatrix& a);

// Solves a*x = b for Hermitian positive definite a without forming a^-1.
CMatrix hermitian_solve(const CMatrix& a, const CMatrix& b);
CVector hermitian_solve(const CMatrix& a, const CVector& b);

CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix block_diag(const std::vector<CMatrix>& blocks);

// ln det(a) for Hermitian positive definite a, via the Cholesky diagonal.
double logdet_hpd(const CMatrix& a);

} // namespace ddce

#endif
