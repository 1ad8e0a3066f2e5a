#include "lagflow/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <vector>

namespace lagflow {

namespace {

std::mutex g_fftw_mutex;  // fftw planning is not thread safe

struct FftBuffer {
    std::vector<std::complex<double>> data;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    FftBuffer(const Grid& g) : data(g.node_count()) {
        int n[3] = {g.n[0], g.n[1], g.n[2]};
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fwd = fftw_plan_dft(g.dim, n, reinterpret_cast<fftw_complex*>(data.data()),
                            reinterpret_cast<fftw_complex*>(data.data()), FFTW_FORWARD,
                            FFTW_ESTIMATE);
        bwd = fftw_plan_dft(g.dim, n, reinterpret_cast<fftw_complex*>(data.data()),
                            reinterpret_cast<fftw_complex*>(data.data()), FFTW_BACKWARD,
                            FFTW_ESTIMATE);
    }
    ~FftBuffer() {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }
};

// angular wavenumber of mode index j on axis a
double wavenumber(const Grid& g, int j, int axis) {
    const int na = g.n[static_cast<std::size_t>(axis)];
    const int f = j <= na / 2 ? j : j - na;
    return 2.0 * 3.14159265358979323846 * f / g.length(axis);
}

void require_periodic(const Grid& g) {
    if (g.boundary != Boundary::Periodic)
        throw Error("spectral operations need a periodic grid");
}

}  // namespace

GridField poisson_periodic(const GridField& rho, double coeff) {
    require_periodic(rho.grid);
    const Grid& g = rho.grid;
    FftBuffer buf(g);
    const std::size_t nodes = g.node_count();
    for (std::size_t i = 0; i < nodes; ++i) buf.data[i] = rho.at(i);
    fftw_execute(buf.fwd);
    for (std::size_t i = 0; i < nodes; ++i) {
        const auto idx = g.unflat(i);
        double k2 = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            const double k = wavenumber(g, idx[static_cast<std::size_t>(a)], a);
            k2 += k * k;
        }
        buf.data[i] = k2 > 0.0 ? buf.data[i] * (-coeff / k2) : 0.0;
    }
    fftw_execute(buf.bwd);
    GridField out(g, 1, "potential");
    const double scale = 1.0 / static_cast<double>(nodes);
    for (std::size_t i = 0; i < nodes; ++i) out.at(i) = buf.data[i].real() * scale;
    return out;
}

GridField spectral_derivative(const GridField& f, int comp, int axis) {
    require_periodic(f.grid);
    const Grid& g = f.grid;
    FftBuffer buf(g);
    const std::size_t nodes = g.node_count();
    for (std::size_t i = 0; i < nodes; ++i) buf.data[i] = f.at(i, comp);
    fftw_execute(buf.fwd);
    for (std::size_t i = 0; i < nodes; ++i) {
        const auto idx = g.unflat(i);
        const int j = idx[static_cast<std::size_t>(axis)];
        const int na = g.n[static_cast<std::size_t>(axis)];
        // Nyquist derivative mode is dropped
        if (na % 2 == 0 && j == na / 2) {
            buf.data[i] = 0.0;
            continue;
        }
        const double k = wavenumber(g, j, axis);
        buf.data[i] *= std::complex<double>(0.0, k);
    }
    fftw_execute(buf.bwd);
    GridField out(g, 1);
    const double scale = 1.0 / static_cast<double>(nodes);
    for (std::size_t i = 0; i < nodes; ++i) out.at(i) = buf.data[i].real() * scale;
    return out;
}

GridField spectral_gradient(const GridField& scalar) {
    GridField out(scalar.grid, scalar.grid.dim);
    for (int a = 0; a < scalar.grid.dim; ++a) {
        GridField d = spectral_derivative(scalar, 0, a);
        const std::size_t nodes = scalar.grid.node_count();
        for (std::size_t i = 0; i < nodes; ++i) out.at(i, a) = d.at(i);
    }
    return out;
}

}  // namespace lagflow
