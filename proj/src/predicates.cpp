#include "globemesh/predicates.hpp"

#include <gmpxx.h>

#include <Eigen/Dense>
#include <cmath>

namespace globemesh {

namespace {

constexpr double kEps = 0x1p-53;
// Forward error bounds for the first-stage evaluation (Shewchuk 1997), doubled.
constexpr double kCcwBound = 2.0 * (3.0 + 16.0 * kEps) * kEps;
constexpr double kO3dBound = 2.0 * (7.0 + 56.0 * kEps) * kEps;
constexpr double kIccBound = 2.0 * (10.0 + 96.0 * kEps) * kEps;
constexpr double kIspBound = 2.0 * (16.0 + 224.0 * kEps) * kEps;

Sign sign_of(double v) { return v > 0 ? Sign::Positive : (v < 0 ? Sign::Negative : Sign::Zero); }
Sign sign_of(const mpq_class& v) { return globemesh::sign_of(sgn(v)); }

void require_finite(Point p) {
    if (!is_finite(p)) throw GeometryError("non-finite coordinate in predicate input");
}

Sign orient2d_exact(Point a, Point b, Point c) {
    const mpq_class acx = mpq_class(a.x) - c.x, acy = mpq_class(a.y) - c.y;
    const mpq_class bcx = mpq_class(b.x) - c.x, bcy = mpq_class(b.y) - c.y;
    return sign_of(mpq_class(acx * bcy - acy * bcx));
}

// Sign convention of orient3d_sh: positive when d lies below the plane of a counterclockwise abc.
Sign orient3d_sh_exact(Point a, Point b, Point c, Point d) {
    const mpq_class adx = mpq_class(a.x) - d.x, ady = mpq_class(a.y) - d.y, adz = mpq_class(a.z) - d.z;
    const mpq_class bdx = mpq_class(b.x) - d.x, bdy = mpq_class(b.y) - d.y, bdz = mpq_class(b.z) - d.z;
    const mpq_class cdx = mpq_class(c.x) - d.x, cdy = mpq_class(c.y) - d.y, cdz = mpq_class(c.z) - d.z;
    const mpq_class det = adx * (bdy * cdz - bdz * cdy) + bdx * (cdy * adz - cdz * ady) + cdx * (ady * bdz - adz * bdy);
    return sign_of(det);
}

Sign orient3d_sh(Point a, Point b, Point c, Point d) {
    const double adx = a.x - d.x, bdx = b.x - d.x, cdx = c.x - d.x;
    const double ady = a.y - d.y, bdy = b.y - d.y, cdy = c.y - d.y;
    const double adz = a.z - d.z, bdz = b.z - d.z, cdz = c.z - d.z;
    const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
    const double cdxady = cdx * ady, adxcdy = adx * cdy;
    const double adxbdy = adx * bdy, bdxady = bdx * ady;
    const double det = adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy) + cdz * (adxbdy - bdxady);
    const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * std::abs(adz) +
                             (std::abs(cdxady) + std::abs(adxcdy)) * std::abs(bdz) +
                             (std::abs(adxbdy) + std::abs(bdxady)) * std::abs(cdz);
    const double bound = kO3dBound * permanent;
    if (det > bound || -det > bound) return sign_of(det);
    return orient3d_sh_exact(a, b, c, d);
}

Sign incircle_ccw_exact(Point a, Point b, Point c, Point d) {
    const mpq_class adx = mpq_class(a.x) - d.x, ady = mpq_class(a.y) - d.y;
    const mpq_class bdx = mpq_class(b.x) - d.x, bdy = mpq_class(b.y) - d.y;
    const mpq_class cdx = mpq_class(c.x) - d.x, cdy = mpq_class(c.y) - d.y;
    const mpq_class alift = adx * adx + ady * ady;
    const mpq_class blift = bdx * bdx + bdy * bdy;
    const mpq_class clift = cdx * cdx + cdy * cdy;
    const mpq_class det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) + clift * (adx * bdy - bdx * ady);
    return sign_of(det);
}

// Positive iff d inside the circle when abc is counterclockwise.
Sign incircle_ccw(Point a, Point b, Point c, Point d) {
    const double adx = a.x - d.x, bdx = b.x - d.x, cdx = c.x - d.x;
    const double ady = a.y - d.y, bdy = b.y - d.y, cdy = c.y - d.y;
    const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
    const double cdxady = cdx * ady, adxcdy = adx * cdy;
    const double adxbdy = adx * bdy, bdxady = bdx * ady;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;
    const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
    const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift + (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                             (std::abs(adxbdy) + std::abs(bdxady)) * clift;
    const double bound = kIccBound * permanent;
    if (det > bound || -det > bound) return sign_of(det);
    return incircle_ccw_exact(a, b, c, d);
}

Sign insphere_sh_exact(Point a, Point b, Point c, Point d, Point e) {
    const mpq_class aex = mpq_class(a.x) - e.x, aey = mpq_class(a.y) - e.y, aez = mpq_class(a.z) - e.z;
    const mpq_class bex = mpq_class(b.x) - e.x, bey = mpq_class(b.y) - e.y, bez = mpq_class(b.z) - e.z;
    const mpq_class cex = mpq_class(c.x) - e.x, cey = mpq_class(c.y) - e.y, cez = mpq_class(c.z) - e.z;
    const mpq_class dex = mpq_class(d.x) - e.x, dey = mpq_class(d.y) - e.y, dez = mpq_class(d.z) - e.z;
    const mpq_class ab = aex * bey - bex * aey;
    const mpq_class bc = bex * cey - cex * bey;
    const mpq_class cd = cex * dey - dex * cey;
    const mpq_class da = dex * aey - aex * dey;
    const mpq_class ac = aex * cey - cex * aey;
    const mpq_class bd = bex * dey - dex * bey;
    const mpq_class abc = aez * bc - bez * ac + cez * ab;
    const mpq_class bcd = bez * cd - cez * bd + dez * bc;
    const mpq_class cda = cez * da + dez * ac + aez * cd;
    const mpq_class dab = dez * ab + aez * bd + bez * da;
    const mpq_class alift = aex * aex + aey * aey + aez * aez;
    const mpq_class blift = bex * bex + bey * bey + bez * bez;
    const mpq_class clift = cex * cex + cey * cey + cez * cez;
    const mpq_class dlift = dex * dex + dey * dey + dez * dez;
    const mpq_class det = (dlift * abc - clift * dab) + (blift * cda - alift * bcd);
    return sign_of(det);
}

// Positive iff e inside the sphere when orient3d_sh(a, b, c, d) is positive.
Sign insphere_sh(Point a, Point b, Point c, Point d, Point e) {
    const double aex = a.x - e.x, bex = b.x - e.x, cex = c.x - e.x, dex = d.x - e.x;
    const double aey = a.y - e.y, bey = b.y - e.y, cey = c.y - e.y, dey = d.y - e.y;
    const double aez = a.z - e.z, bez = b.z - e.z, cez = c.z - e.z, dez = d.z - e.z;
    const double aexbey = aex * bey, bexaey = bex * aey;
    const double bexcey = bex * cey, cexbey = cex * bey;
    const double cexdey = cex * dey, dexcey = dex * cey;
    const double dexaey = dex * aey, aexdey = aex * dey;
    const double aexcey = aex * cey, cexaey = cex * aey;
    const double bexdey = bex * dey, dexbey = dex * bey;
    const double ab = aexbey - bexaey, bc = bexcey - cexbey, cd = cexdey - dexcey;
    const double da = dexaey - aexdey, ac = aexcey - cexaey, bd = bexdey - dexbey;
    const double abc = aez * bc - bez * ac + cez * ab;
    const double bcd = bez * cd - cez * bd + dez * bc;
    const double cda = cez * da + dez * ac + aez * cd;
    const double dab = dez * ab + aez * bd + bez * da;
    const double alift = aex * aex + aey * aey + aez * aez;
    const double blift = bex * bex + bey * bey + bez * bez;
    const double clift = cex * cex + cey * cey + cez * cez;
    const double dlift = dex * dex + dey * dey + dez * dez;
    const double det = (dlift * abc - clift * dab) + (blift * cda - alift * bcd);

    const double aezp = std::abs(aez), bezp = std::abs(bez), cezp = std::abs(cez), dezp = std::abs(dez);
    const double aexbeyp = std::abs(aexbey), bexaeyp = std::abs(bexaey);
    const double bexceyp = std::abs(bexcey), cexbeyp = std::abs(cexbey);
    const double cexdeyp = std::abs(cexdey), dexceyp = std::abs(dexcey);
    const double dexaeyp = std::abs(dexaey), aexdeyp = std::abs(aexdey);
    const double aexceyp = std::abs(aexcey), cexaeyp = std::abs(cexaey);
    const double bexdeyp = std::abs(bexdey), dexbeyp = std::abs(dexbey);
    const double permanent =
        ((cexdeyp + dexceyp) * bezp + (dexbeyp + bexdeyp) * cezp + (bexceyp + cexbeyp) * dezp) * alift +
        ((dexaeyp + aexdeyp) * cezp + (aexceyp + cexaeyp) * dezp + (cexdeyp + dexceyp) * aezp) * blift +
        ((aexbeyp + bexaeyp) * dezp + (bexdeyp + dexbeyp) * aezp + (dexaeyp + aexdeyp) * bezp) * clift +
        ((bexceyp + cexbeyp) * aezp + (cexaeyp + aexceyp) * bezp + (aexbeyp + bexaeyp) * cezp) * dlift;
    const double bound = kIspBound * permanent;
    if (det > bound || -det > bound) return sign_of(det);
    return insphere_sh_exact(a, b, c, d, e);
}

}  // namespace

Sign orient2d(Point a, Point b, Point c) {
    const double detleft = (a.x - c.x) * (b.y - c.y);
    const double detright = (a.y - c.y) * (b.x - c.x);
    const double det = detleft - detright;
    const double bound = kCcwBound * (std::abs(detleft) + std::abs(detright));
    if (det > bound || -det > bound) return sign_of(det);
    return orient2d_exact(a, b, c);
}

Sign orient3d(Point a, Point b, Point c, Point d) { return -orient3d_sh(a, b, c, d); }

Sign incircle(Point a, Point b, Point c, Point d) {
    const Sign o = orient2d(a, b, c);
    if (o == Sign::Zero) throw GeometryError("incircle on a degenerate triangle");
    return globemesh::sign_of(to_int(incircle_ccw(a, b, c, d)) * to_int(o));
}

Sign insphere(Point a, Point b, Point c, Point d, Point e) {
    const Sign o = orient3d_sh(a, b, c, d);
    if (o == Sign::Zero) throw GeometryError("insphere on a degenerate tetrahedron");
    return globemesh::sign_of(to_int(insphere_sh(a, b, c, d, e)) * to_int(o));
}

Sign orient(std::span<const Point> s) {
    for (const Point& p : s) require_finite(p);
    if (s.size() == 3) return orient2d(s[0], s[1], s[2]);
    if (s.size() == 4) return orient3d(s[0], s[1], s[2], s[3]);
    throw GeometryError("orient expects 3 (2D) or 4 (3D) points");
}

Sign in_circumsphere(std::span<const Point> s, Point q) {
    for (const Point& p : s) require_finite(p);
    require_finite(q);
    if (s.size() == 3) return incircle(s[0], s[1], s[2], q);
    if (s.size() == 4) return insphere(s[0], s[1], s[2], s[3], q);
    throw GeometryError("in_circumsphere expects 3 (2D) or 4 (3D) points");
}

Sphere circumsphere(std::span<const Point> pts) {
    const int k = static_cast<int>(pts.size()) - 1;
    if (k < 1 || k > 3) throw GeometryError("circumsphere expects 2 to 4 points");
    for (const Point& p : pts) require_finite(p);
    const Point p0 = pts[0];
    std::array<Point, 3> v{};
    for (int i = 0; i < k; ++i) v[i] = pts[i + 1] - p0;

    // Center = p0 + sum_j lambda_j v_j with 2 (v_i . v_j) lambda_j = |v_i|^2.
    Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    double scale = 1.0;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) gram(i, j) = 2.0 * dot(v[i], v[j]);
        rhs(i) = norm2(v[i]);
        scale *= 2.0 * norm2(v[i]);
    }
    const auto block = gram.topLeftCorner(k, k);
    const double det = block.determinant();
    if (!(scale > 0.0) || std::abs(det) <= 1e-24 * scale)
        throw GeometryError("circumsphere of affinely dependent points");
    const Eigen::VectorXd lambda = block.fullPivLu().solve(rhs.head(k));
    Point offset{};
    for (int i = 0; i < k; ++i) offset += lambda(i) * v[i];
    Sphere s{p0 + offset, 0.0};
    // Average the distances so the radius is symmetric in the inputs.
    for (const Point& p : pts) s.radius += distance(s.center, p);
    s.radius /= static_cast<double>(pts.size());
    return s;
}

}  // namespace globemesh
