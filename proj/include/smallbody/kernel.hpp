#pragma once

// Free-space Helmholtz kernel g(x,y) = e^{ik|x-y|} / (4π|x-y|) and its
// derivatives. Templated on the real scalar so the same expressions serve
// double solvers and extended-precision oracles.

#include "smallbody/types.hpp"

#include <cmath>
#include <complex>

namespace smallbody {

template <typename Scalar>
using Point3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
using ComplexPoint3 = Eigen::Matrix<std::complex<Scalar>, 3, 1>;

template <typename Scalar>
using ComplexMat3 = Eigen::Matrix<std::complex<Scalar>, 3, 3>;

namespace detail {

template <typename Scalar>
Scalar checked_distance(const Point3<Scalar>& x, const Point3<Scalar>& y, const char* what) {
  const Scalar r = (x - y).norm();
  if (!(r > Scalar(0))) throw SingularEvaluation(std::string(what) + ": coincident points");
  return r;
}

template <typename Scalar>
std::complex<Scalar> kernel_at(Scalar r, Scalar k) {
  using std::cos;
  using std::sin;
  const Scalar four_pi = Scalar(4) * Scalar(kPi);
  return std::complex<Scalar>(cos(k * r), sin(k * r)) / (four_pi * r);
}

}  // namespace detail

/// g(x,y); for k = 0 this is the static kernel 1/(4π|x-y|).
template <typename Scalar>
std::complex<Scalar> free_kernel(const Point3<Scalar>& x, const Point3<Scalar>& y, Scalar k) {
  return detail::kernel_at(detail::checked_distance(x, y, "free_kernel"), k);
}

/// ∇_y g(x,y) = g (ik - 1/r) (y - x)/r.
template <typename Scalar>
ComplexPoint3<Scalar> free_kernel_grad_y(const Point3<Scalar>& x, const Point3<Scalar>& y, Scalar k) {
  const Scalar r = detail::checked_distance(x, y, "free_kernel_grad_y");
  const std::complex<Scalar> g = detail::kernel_at(r, k);
  const std::complex<Scalar> radial = g * std::complex<Scalar>(-Scalar(1) / r, k);
  return ((y - x) / r).template cast<std::complex<Scalar>>() * radial;
}

/// ∇_x g(x,y) = -∇_y g(x,y).
template <typename Scalar>
ComplexPoint3<Scalar> free_kernel_grad_x(const Point3<Scalar>& x, const Point3<Scalar>& y, Scalar k) {
  return -free_kernel_grad_y(x, y, k);
}

/// Mixed second derivative, entry (i,p) = ∂²g / ∂x_i ∂y_p.
template <typename Scalar>
ComplexMat3<Scalar> free_kernel_hessian_xy(const Point3<Scalar>& x, const Point3<Scalar>& y, Scalar k) {
  using C = std::complex<Scalar>;
  const Scalar r = detail::checked_distance(x, y, "free_kernel_hessian_xy");
  const C g = detail::kernel_at(r, k);
  const C s = C(-Scalar(1) / r, k);          // g'/g
  const C g1 = g * s;                         // dg/dr
  const C g2 = g * (s * s + Scalar(1) / (r * r));  // d²g/dr²
  const Point3<Scalar> e = (x - y) / r;
  const Eigen::Matrix<Scalar, 3, 3> ee = e * e.transpose();
  const Eigen::Matrix<Scalar, 3, 3> eye = Eigen::Matrix<Scalar, 3, 3>::Identity();
  // Hessian in x is g'' ee + (g'/r)(I - ee); ∂_y = -∂_x on a function of x - y.
  return -(ee.template cast<C>() * g2 + (eye - ee).template cast<C>() * (g1 / r));
}

/// ∫ over a cube of side h centred at the origin of 1/|x| dV, divided by h².
/// Computed once by adaptive quadrature (tests/test_kernel_grid.cpp keeps the oracle).
inline constexpr double kUnitCubeInverseDistance = 2.380077363979553;

/// Cell-averaged kernel mass ∫_cell g(z_i, z) dz for the cell that contains z_i:
/// static part h²·C/(4π) plus the regular first-order term ik h³/(4π).
template <typename Scalar>
std::complex<Scalar> cube_self_integral(Scalar h, Scalar k) {
  const Scalar four_pi = Scalar(4) * Scalar(kPi);
  return std::complex<Scalar>(Scalar(kUnitCubeInverseDistance) * h * h / four_pi,
                              k * h * h * h / four_pi);
}

// Double-precision conveniences used throughout the library.
inline Complex free_kernel(const Vec3& x, const Vec3& y, double k) { return free_kernel<double>(x, y, k); }

}  // namespace smallbody
