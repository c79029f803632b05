#include "magodom/magnetostatics.hpp"

#include <cmath>

namespace magodom {

GradVec vdash(const Matrix3d& G) {
  const double asym = (G - G.transpose()).norm();
  const double tr = std::abs(G.trace());
  if (asym > 1e-8 || tr > 1e-8) {
    throw NotSymmetricTraceless("gradient not symmetric traceless: asym=" +
                                std::to_string(asym) + " trace=" + std::to_string(tr));
  }
  GradVec g;
  g << G(0, 0), G(0, 1), G(0, 2), G(1, 1), G(1, 2);
  return g;
}

Matrix3d unvdash(const GradVec& g) {
  Matrix3d G;
  G << g[0], g[1], g[2],
       g[1], g[3], g[4],
       g[2], g[4], -(g[0] + g[3]);
  return G;
}

InvariantTriple invariants(const FieldSample& sample) {
  const Matrix3d G = unvdash(sample.gvec);
  return InvariantTriple{sample.B.norm(), G.norm(), G.determinant()};
}

MagWorld::MagWorld(const Vector3d& background, std::vector<Dipole> dipoles,
                   double exclusion_radius, double dipole_scale,
                   const GradVec& background_gradient)
    : background_(background),
      background_gradient_(unvdash(background_gradient)),
      dipoles_(std::move(dipoles)),
      exclusion_radius_(exclusion_radius),
      dipole_scale_(dipole_scale) {}

MagWorld::FieldEval MagWorld::eval(const Vector3d& r) const {
  FieldEval out;
  out.B = background_ + background_gradient_ * r;
  out.G = background_gradient_;
  for (const Dipole& d : dipoles_) {
    const Vector3d q = r - d.position;
    const double n = q.norm();
    if (n < exclusion_radius_) {
      throw EvaluationInsideExclusionZone(
          "field query within exclusion radius of a dipole (dist=" +
          std::to_string(n) + ")");
    }
    const double n2 = n * n;
    const double n3 = n2 * n;
    const double n5 = n3 * n2;
    const Vector3d& m = d.moment;
    const double mq = m.dot(q);
    // B = k (3 q (m.q)/n^5 - m/n^3)
    out.B += dipole_scale_ * (3.0 * mq / n5 * q - m / n3);
    // G_ij = k [3 d_ij (m.q) + 3 q_i m_j + 3 m_i q_j - 15 q_i q_j (m.q)/n^2] / n^5
    Matrix3d G = 3.0 * mq * Matrix3d::Identity();
    G += 3.0 * (q * m.transpose() + m * q.transpose());
    G -= 15.0 * mq / n2 * (q * q.transpose());
    out.G += dipole_scale_ / n5 * G;
  }
  return out;
}

}  // namespace magodom
