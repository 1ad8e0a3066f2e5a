#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace lagflow {

// All vectors are stored with 3 slots; for dim < 3 the trailing components
// stay exactly zero and every kernel loops over the active dimension only.
struct Vec3 {
    std::array<double, 3> c{0.0, 0.0, 0.0};

    Vec3() = default;
    Vec3(double x, double y = 0.0, double z = 0.0) : c{x, y, z} {}

    double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

    Vec3& operator+=(const Vec3& o) {
        c[0] += o.c[0]; c[1] += o.c[1]; c[2] += o.c[2];
        return *this;
    }
    Vec3& operator-=(const Vec3& o) {
        c[0] -= o.c[0]; c[1] -= o.c[1]; c[2] -= o.c[2];
        return *this;
    }
    Vec3& operator*=(double s) {
        c[0] *= s; c[1] *= s; c[2] *= s;
        return *this;
    }
    friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend Vec3 operator*(double s, Vec3 a) { return a *= s; }

    double dot(const Vec3& o) const { return c[0]*o.c[0] + c[1]*o.c[1] + c[2]*o.c[2]; }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
    Vec3 cross(const Vec3& o) const {
        return {c[1]*o.c[2] - c[2]*o.c[1],
                c[2]*o.c[0] - c[0]*o.c[2],
                c[0]*o.c[1] - c[1]*o.c[0]};
    }
};

// dim x dim matrix embedded in 3x3 storage, row-major: a[row][col].
struct Mat3 {
    std::array<std::array<double, 3>, 3> a{};
    int dim = 3;

    explicit Mat3(int d = 3) : dim(d) {}

    static Mat3 identity(int d) {
        Mat3 m(d);
        for (int i = 0; i < d; ++i) m.a[i][i] = 1.0;
        return m;
    }

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }

    double det() const {
        if (dim == 1) return a[0][0];
        if (dim == 2) return a[0][0]*a[1][1] - a[0][1]*a[1][0];
        return a[0][0]*(a[1][1]*a[2][2] - a[1][2]*a[2][1])
             - a[0][1]*(a[1][0]*a[2][2] - a[1][2]*a[2][0])
             + a[0][2]*(a[1][0]*a[2][1] - a[1][1]*a[2][0]);
    }

    Mat3 inverse() const;

    Mat3 transpose() const {
        Mat3 t(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) t.a[i][j] = a[j][i];
        return t;
    }

    Vec3 apply(const Vec3& v) const {
        Vec3 r;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) r[i] += a[i][j] * v[j];
        return r;
    }

    // transpose(A) * v, the index pattern of J_k = p_m A^m_k
    Vec3 applyT(const Vec3& v) const {
        Vec3 r;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) r[i] += a[j][i] * v[j];
        return r;
    }

    Mat3 mul(const Mat3& o) const {
        Mat3 r(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                double s = 0.0;
                for (int k = 0; k < dim; ++k) s += a[i][k] * o.a[k][j];
                r.a[i][j] = s;
            }
        return r;
    }
};

// error hierarchy; the CLI maps these onto exit codes
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConstructionError : Error { using Error::Error; };
struct FoldingError : Error { using Error::Error; };       // det A <= 0
struct InverseError : Error { using Error::Error; };       // Newton failed
struct OutOfDomain : Error { using Error::Error; };
struct VacuumError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

inline constexpr double pi = 3.14159265358979323846;

}  // namespace lagflow
