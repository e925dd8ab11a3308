#pragma once

#include <array>
#include <complex>
#include <iosfwd>

namespace nhsta {

using cplx = std::complex<double>;
using ComplexVector2 = std::array<cplx, 2>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

// Dense 2x2 complex matrix, row-major.
class ComplexMatrix2 {
public:
    constexpr ComplexMatrix2() = default;
    constexpr ComplexMatrix2(cplx a00, cplx a01, cplx a10, cplx a11) : m_{a00, a01, a10, a11} {}

    static constexpr ComplexMatrix2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr ComplexMatrix2 zero() { return {}; }
    static constexpr ComplexMatrix2 sigma_x() { return {0.0, 1.0, 1.0, 0.0}; }
    static constexpr ComplexMatrix2 sigma_y() { return {0.0, cplx{0.0, -1.0}, cplx{0.0, 1.0}, 0.0}; }
    static constexpr ComplexMatrix2 sigma_z() { return {1.0, 0.0, 0.0, -1.0}; }
    static constexpr ComplexMatrix2 diag(cplx a, cplx b) { return {a, 0.0, 0.0, b}; }

    cplx& operator()(int r, int c) { return m_[2 * r + c]; }
    const cplx& operator()(int r, int c) const { return m_[2 * r + c]; }

    const std::array<cplx, 4>& data() const { return m_; }

    cplx det() const { return m_[0] * m_[3] - m_[1] * m_[2]; }
    cplx trace() const { return m_[0] + m_[3]; }
    ComplexMatrix2 adjoint() const;
    ComplexMatrix2 transpose() const { return {m_[0], m_[2], m_[1], m_[3]}; }
    // Throws SingularMatrixError when |det| <= tol.
    ComplexMatrix2 inverse(double tol = 0.0) const;

    ComplexVector2 column(int c) const { return {m_[c], m_[2 + c]}; }
    ComplexVector2 row(int r) const { return {m_[2 * r], m_[2 * r + 1]}; }

    // Largest singular value.
    double spectral_norm() const;
    double frobenius_norm() const;
    double max_abs() const;
    bool all_finite() const;

    ComplexMatrix2& operator+=(const ComplexMatrix2& o);
    ComplexMatrix2& operator-=(const ComplexMatrix2& o);
    ComplexMatrix2& operator*=(cplx s);

private:
    std::array<cplx, 4> m_{};
};

ComplexMatrix2 operator+(ComplexMatrix2 a, const ComplexMatrix2& b);
ComplexMatrix2 operator-(ComplexMatrix2 a, const ComplexMatrix2& b);
ComplexMatrix2 operator-(const ComplexMatrix2& a);
ComplexMatrix2 operator*(const ComplexMatrix2& a, const ComplexMatrix2& b);
ComplexMatrix2 operator*(cplx s, ComplexMatrix2 a);
ComplexMatrix2 operator*(ComplexMatrix2 a, cplx s);
inline ComplexMatrix2 operator/(ComplexMatrix2 a, cplx s) { return a * (cplx(1.0) / s); }
ComplexVector2 operator*(const ComplexMatrix2& a, const ComplexVector2& v);

double norm(const ComplexVector2& v);

std::ostream& operator<<(std::ostream& os, const ComplexMatrix2& m);

// Coefficients of f0*1 + fx*sx + fy*sy + fz*sz.
struct PauliFields {
    cplx x{};
    cplx y{};
    cplx z{};

    ComplexMatrix2 matrix() const;
    // Traceless part of m.
    static PauliFields from_matrix(const ComplexMatrix2& m);
    double norm_sq() const { return std::norm(x) + std::norm(y) + std::norm(z); }
    // fx^2 + fy^2 + fz^2; eigenvalues of the matrix are +-sqrt of this.
    cplx discriminant() const { return x * x + y * y + z * z; }

    PauliFields& operator+=(const PauliFields& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
};

inline PauliFields operator+(PauliFields a, const PauliFields& b) { return a += b; }
inline PauliFields operator-(const PauliFields& a, const PauliFields& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
}

}  // namespace nhsta
