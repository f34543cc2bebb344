#include <cmath>

#include "safekern/simulate.hpp"

namespace safekern {

// Hover linearization of the rigid-body quadrotor. State ordering:
//   (x, y, z, xdot, ydot, zdot, phi, theta, psi, phidot, thetadot, psidot).
// About phi = theta = 0 with the hover thrust absorbed into the input, so
// u1 is thrust deviation:  xddot = g theta, yddot = -g phi, zddot = u1, and
// the Euler-angle accelerations are commanded directly by u2..u4. The case
// study's absolute thrust box is recorded in input_box; the model's control
// set is its inscribed ellipsoid re-centered at the hover input.
QuadrotorModel quadrotor_model() {
    constexpr double g = 9.81;
    constexpr int n = 12;
    QuadrotorModel m;

    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < 3; ++i) a(i, i + 3) = 1.0;   // positions
    a(3, 7) = g;                                     // xddot = g theta
    a(4, 6) = -g;                                    // yddot = -g phi
    for (int i = 6; i < 9; ++i) a(i, i + 3) = 1.0;   // Euler angles

    Matrix b = Matrix::Zero(n, 4);
    b(5, 0) = 1.0;   // thrust deviation
    b(9, 1) = 1.0;   // roll acceleration
    b(10, 2) = 1.0;  // pitch acceleration
    b(11, 3) = 1.0;  // yaw acceleration

    Matrix gmat = Matrix::Zero(n, 1);
    gmat(3, 0) = 1.0;
    gmat(4, 0) = 1.0;
    gmat(5, 0) = 1.0;

    m.sys = LtiSystem{a, b, gmat};

    // Flight envelope: position ball radius 3 about (0,0,4), speed <= 5,
    // angles within [-pi/2, pi/2], rates within [-3, 3]. The max-volume
    // inscribed ellipsoid of this product of balls and boxes is axis-aligned
    // with semi-axes equal to the factor radii / half-widths.
    Vector kc = Vector::Zero(n);
    kc(2) = 4.0;
    Vector semi(n);
    semi << 3, 3, 3, 5, 5, 5, M_PI / 2, M_PI / 2, M_PI / 2, 3, 3, 3;
    m.constraint = Ellipsoid(kc, semi.cwiseAbs2().asDiagonal());

    m.input_box.lower = Vector(4);
    m.input_box.lower << 0.5, -0.5, -0.5, -0.5;
    m.input_box.upper = Vector(4);
    m.input_box.upper << 5.4, 0.5, 0.5, 0.5;
    const Ellipsoid box_e = mvie_box(m.input_box);
    m.bounds.control = Ellipsoid(Vector::Zero(4), box_e.shape());

    Vector vc(1);
    vc << 0.05;
    Matrix vs(1, 1);
    vs << 0.0025;  // wind speed uniform over [0, 0.1]
    m.bounds.disturbance = Ellipsoid(vc, vs);

    m.x0 = Vector(n);
    m.x0 << -0.4032, 0.7641, 3.6437, -1.2406, 0.0165, 3.0335, -0.0789,
        -0.4835, -0.3841, 0.0375, 0.6806, 0.5509;
    m.x_ss = Vector::Zero(n);
    m.x_ss(2) = 5.0;

    m.q_lqr = 1e-5 * Matrix::Identity(n, n);
    Vector rdiag(4);
    rdiag << 1e-6, 1e8, 1e8, 1e8;
    m.r_lqr = rdiag.asDiagonal();
    return m;
}

}  // namespace safekern
