// Test-only reference implementations, kept independent of the library's
// computational paths: series evaluation instead of cyl_bessel_j, Jacobi
// eigenvalues instead of Cholesky, Gauss-Jordan inversion with explicit
// latent covariances instead of structured MMSE assembly, and a rank-one
// closed form for the Gaussian block metric.
#ifndef DDCE_TEST_ORACLES_HPP
#define DDCE_TEST_ORACLES_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "ddce/cmatrix.hpp"
#include "ddce/fading.hpp"

namespace oracle {

using ddce::cd;
using ddce::CMatrix;
using ddce::CVector;

// J0 via its power series sum_k (-1)^k (x^2/4)^k / (k!)^2.
inline double j0_series(double x) {
    const double q = x * x / 4.0;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= -q / (static_cast<double>(k) * k);
        sum += term;
        if (std::abs(term) < 1e-18) break;
    }
    return sum;
}

// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
    const int n = static_cast<int>(a.size());
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-26) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
                const double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> eig(n);
    for (int i = 0; i < n; ++i) eig[i] = a[i][i];
    return eig;
}

// Eigenvalues of a complex Hermitian matrix via the 2n x 2n real symmetric
// embedding [[Re, -Im], [Im, Re]]; each eigenvalue appears twice.
inline std::vector<double> hermitian_eigenvalues(const CMatrix& m) {
    const int n = m.rows;
    std::vector<std::vector<double>> r(2 * n, std::vector<double>(2 * n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            r[i][j] = m(i, j).real();
            r[i][n + j] = -m(i, j).imag();
            r[n + i][j] = m(i, j).imag();
            r[n + i][n + j] = m(i, j).real();
        }
    return jacobi_eigenvalues(std::move(r));
}

inline double logdet_eigen(const CMatrix& m) {
    double s = 0.0;
    for (double e : hermitian_eigenvalues(m)) s += std::log(e);
    return 0.5 * s; // embedding doubles every eigenvalue
}

// Gauss-Jordan inverse with partial pivoting.
inline CMatrix gj_inverse(CMatrix a) {
    const int n = a.rows;
    CMatrix inv = CMatrix::identity(n);
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (std::abs(a(pivot, col)) < 1e-300) throw std::runtime_error("gj_inverse: singular");
        if (pivot != col)
            for (int c = 0; c < n; ++c) {
                std::swap(a(pivot, c), a(col, c));
                std::swap(inv(pivot, c), inv(col, c));
            }
        const cd d = a(col, col);
        for (int c = 0; c < n; ++c) {
            a(col, c) /= d;
            inv(col, c) /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const cd f = a(r, col);
            if (f == cd{}) continue;
            for (int c = 0; c < n; ++c) {
                a(r, c) -= f * a(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    return inv;
}

// Conditional mean E[targets | observations] for the windowed channel model
//   y_t^(n) = sum_m c_{m,t} h_{n,m,t} + w,  Cov(h_{n,m,t}, h_{n',m',t'}) =
//   delta delta R(t - t'),
// assembled from the full latent covariance over every antenna pair and
// time index involved.
struct ConditionProblem {
    ddce::AutocorrFn r;
    double sigma_w2 = 0.0;
    CMatrix decided;                // n_t x w, column j is the symbol at window_times[j]
    std::vector<int> window_times;  // observation times
    std::vector<int> target_times;  // predicted times
    int n_r = 1;
    CMatrix y;                      // w x n_r
};

// Returns (target_times.size() * n_t) x n_r: per target time, transmit
// antennas within, one column per receive antenna.
inline CMatrix condition_oracle(const ConditionProblem& p) {
    const int n_t = p.decided.rows;
    const int w = static_cast<int>(p.window_times.size());
    std::vector<int> all_times = p.window_times;
    all_times.insert(all_times.end(), p.target_times.begin(), p.target_times.end());
    const int nt_total = static_cast<int>(all_times.size());

    // Latent vector per receive antenna: h_{m, all_times[i]} ordered time-major.
    const int h_dim = n_t * nt_total;
    CMatrix cov_h(h_dim, h_dim);
    for (int i = 0; i < nt_total; ++i)
        for (int m = 0; m < n_t; ++m)
            for (int j = 0; j < nt_total; ++j)
                for (int mm = 0; mm < n_t; ++mm)
                    if (m == mm) cov_h(i * n_t + m, j * n_t + mm) = p.r(all_times[i] - all_times[j]);

    // Observation map (per receive antenna): rows index window entries.
    CMatrix obs(w, h_dim);
    for (int j = 0; j < w; ++j)
        for (int m = 0; m < n_t; ++m) obs(j, j * n_t + m) = p.decided(m, j);

    CMatrix cov_yy = ddce::mul(ddce::mul(obs, cov_h), ddce::adjoint(obs));
    for (int i = 0; i < w; ++i) cov_yy(i, i) += p.sigma_w2;

    const int g_dim = static_cast<int>(p.target_times.size()) * n_t;
    CMatrix sel(g_dim, h_dim);
    for (size_t ti = 0; ti < p.target_times.size(); ++ti)
        for (int m = 0; m < n_t; ++m)
            sel(static_cast<int>(ti) * n_t + m, (w + static_cast<int>(ti)) * n_t + m) = 1.0;

    const CMatrix gain = ddce::mul(ddce::mul(sel, ddce::mul(cov_h, ddce::adjoint(obs))), gj_inverse(cov_yy));
    return ddce::mul(gain, p.y);
}

// Gaussian block metric in closed form for Gamma = sigma2 I + v v^H.
inline double ml_metric_rank1(const CVector& y, const CVector& v, double sigma2) {
    const int d = static_cast<int>(y.size());
    double vnorm2 = 0.0, rnorm2 = 0.0;
    cd vhr = 0.0;
    for (int i = 0; i < d; ++i) {
        const cd r = y[i] - v[i];
        vnorm2 += std::norm(v[i]);
        rnorm2 += std::norm(r);
        vhr += std::conj(v[i]) * r;
    }
    const double quad = (rnorm2 - std::norm(vhr) / (sigma2 + vnorm2)) / sigma2;
    return quad + (d - 1) * std::log(sigma2) + std::log(sigma2 + vnorm2);
}

} // namespace oracle

#endif
