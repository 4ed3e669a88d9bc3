#include "fractal/network.hpp"

namespace fractal {

std::string to_string(EdgeClass c) {
    switch (c) {
        case EdgeClass::one: return "one";
        case EdgeClass::vee: return "vee";
        case EdgeClass::mixed: return "mixed";
        case EdgeClass::none: break;
    }
    return "none";
}

Vector<double> spectrum(const ConductanceNetwork<double>& net, const Vector<double>& measure) {
    if (measure.size() != net.size()) throw DomainError("spectrum: measure size does not match network");
    if ((measure.array() <= 0.0).any()) throw DomainError("spectrum: measure must be positive");
    // K f = lambda M f with M diagonal, symmetrised as M^{-1/2} K M^{-1/2}.
    const Vector<double> scale = measure.array().rsqrt();
    const Matrix<double> k = scale.asDiagonal() * net.laplacian() * scale.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix<double>> solver(k, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw DomainError("spectrum: eigensolver failed");
    Vector<double> ev = solver.eigenvalues();
    const double top = ev.size() > 0 ? std::abs(ev(ev.size() - 1)) : 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (std::abs(ev(i)) <= 1e-12 * std::max(1.0, top)) ev(i) = 0.0;
    return ev;
}

}  // namespace fractal
