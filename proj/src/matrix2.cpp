#include "nhsta/matrix2.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "nhsta/errors.hpp"

namespace nhsta {

ComplexMatrix2 ComplexMatrix2::adjoint() const {
    return {std::conj(m_[0]), std::conj(m_[2]), std::conj(m_[1]), std::conj(m_[3])};
}

ComplexMatrix2 ComplexMatrix2::inverse(double tol) const {
    const cplx d = det();
    if (!(std::abs(d) > tol)) throw SingularMatrixError("matrix not invertible: |det| below tolerance");
    const cplx inv = 1.0 / d;
    return {m_[3] * inv, -m_[1] * inv, -m_[2] * inv, m_[0] * inv};
}

double ComplexMatrix2::spectral_norm() const {
    // sigma_max^2 is the largest eigenvalue of A^H A: (f + sqrt(f^2 - 4|det|^2)) / 2
    const double f = std::norm(m_[0]) + std::norm(m_[1]) + std::norm(m_[2]) + std::norm(m_[3]);
    if (f == 0.0) return 0.0;
    const double ad = std::abs(det());
    // sigma_max^2 + sigma_min^2 = f, sigma_max*sigma_min = |det|
    const double sum = std::sqrt(f + 2.0 * ad);
    const double diff = std::sqrt(std::max(0.0, f - 2.0 * ad));
    return 0.5 * (sum + diff);
}

double ComplexMatrix2::frobenius_norm() const {
    return std::sqrt(std::norm(m_[0]) + std::norm(m_[1]) + std::norm(m_[2]) + std::norm(m_[3]));
}

double ComplexMatrix2::max_abs() const {
    double r = 0.0;
    for (const auto& z : m_) r = std::max(r, std::abs(z));
    return r;
}

bool ComplexMatrix2::all_finite() const {
    return std::all_of(m_.begin(), m_.end(),
                       [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

ComplexMatrix2& ComplexMatrix2::operator+=(const ComplexMatrix2& o) {
    for (int k = 0; k < 4; ++k) m_[k] += o.m_[k];
    return *this;
}

ComplexMatrix2& ComplexMatrix2::operator-=(const ComplexMatrix2& o) {
    for (int k = 0; k < 4; ++k) m_[k] -= o.m_[k];
    return *this;
}

ComplexMatrix2& ComplexMatrix2::operator*=(cplx s) {
    for (auto& z : m_) z *= s;
    return *this;
}

ComplexMatrix2 operator+(ComplexMatrix2 a, const ComplexMatrix2& b) { return a += b; }
ComplexMatrix2 operator-(ComplexMatrix2 a, const ComplexMatrix2& b) { return a -= b; }
ComplexMatrix2 operator-(const ComplexMatrix2& a) { return -1.0 * a; }

ComplexMatrix2 operator*(const ComplexMatrix2& a, const ComplexMatrix2& b) {
    return {a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0), a(0, 0) * b(0, 1) + a(0, 1) * b(1, 1),
            a(1, 0) * b(0, 0) + a(1, 1) * b(1, 0), a(1, 0) * b(0, 1) + a(1, 1) * b(1, 1)};
}

ComplexMatrix2 operator*(cplx s, ComplexMatrix2 a) { return a *= s; }
ComplexMatrix2 operator*(ComplexMatrix2 a, cplx s) { return a *= s; }

ComplexVector2 operator*(const ComplexMatrix2& a, const ComplexVector2& v) {
    return {a(0, 0) * v[0] + a(0, 1) * v[1], a(1, 0) * v[0] + a(1, 1) * v[1]};
}

double norm(const ComplexVector2& v) { return std::sqrt(std::norm(v[0]) + std::norm(v[1])); }

std::ostream& operator<<(std::ostream& os, const ComplexMatrix2& m) {
    return os << "[[" << m(0, 0) << ", " << m(0, 1) << "], [" << m(1, 0) << ", " << m(1, 1) << "]]";
}

ComplexMatrix2 PauliFields::matrix() const { return {z, x - kI * y, x + kI * y, -z}; }

PauliFields PauliFields::from_matrix(const ComplexMatrix2& m) {
    return {0.5 * (m(0, 1) + m(1, 0)), 0.5 * kI * (m(0, 1) - m(1, 0)), 0.5 * (m(0, 0) - m(1, 1))};
}

}  // namespace nhsta
