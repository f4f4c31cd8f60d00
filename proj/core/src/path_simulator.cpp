#include "powvar/path_simulator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "powvar/parallel.hpp"
#include "powvar/rng.hpp"

namespace powvar {

namespace {

constexpr char kMagic[8] = {'P', 'V', 'A', 'R', '1', 0, 0, 0};

}  // namespace

void PathEnsemble::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("PathEnsemble::save: cannot open " + path);
    out.write(kMagic, 8);
    double t = grid.horizon, e = grid.epsilon_max;
    std::int64_t n = grid.n, np = values.cols();
    out.write((const char*)&t, 8);
    out.write((const char*)&e, 8);
    out.write((const char*)&n, 8);
    out.write((const char*)&np, 8);
    out.write((const char*)&seed, 8);
    out.write((const char*)&model_digest, 8);
    for (int p = 0; p < values.cols(); ++p)
        out.write((const char*)values.col(p).data(), (std::streamsize)(8 * grid.n));
    if (!out) throw std::runtime_error("PathEnsemble::save: write failed");
}

PathEnsemble load_impl(std::ifstream& in, const std::string& path) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("PathEnsemble::load: bad magic in " + path);
    PathEnsemble e;
    double t, em;
    std::int64_t n, np;
    in.read((char*)&t, 8);
    in.read((char*)&em, 8);
    in.read((char*)&n, 8);
    in.read((char*)&np, 8);
    in.read((char*)&e.seed, 8);
    in.read((char*)&e.model_digest, 8);
    if (!in || n < 2 || np < 0)
        throw std::runtime_error("PathEnsemble::load: bad header in " + path);
    e.grid = TimeGrid{t, em, (int)n};
    e.grid.validate();
    e.values.resize(n, np);
    for (int p = 0; p < np; ++p)
        in.read((char*)e.values.col(p).data(), (std::streamsize)(8 * n));
    if (!in) throw std::runtime_error("PathEnsemble::load: truncated " + path);
    return e;
}

PathEnsemble PathEnsemble::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("PathEnsemble::load: cannot open " + path);
    return load_impl(in, path);
}

PathEnsemble simulate_gaussian(const CovarianceModel& model, const TimeGrid& grid,
                               int n_paths, std::uint64_t seed) {
    grid.validate();
    if (n_paths < 1) throw std::invalid_argument("simulate_gaussian: n_paths < 1");
    const int n = grid.n;
    const int k = n - 1;  // X(0) = 0 identically; factor the rest

    Eigen::MatrixXd K(k, k);
    parallelFor((std::size_t)k, [&](std::size_t r) {
        double tr = grid.time((int)r + 1);
        for (std::size_t c = 0; c <= r; ++c)
            K((Eigen::Index)r, (Eigen::Index)c) = model.Q(grid.time((int)c + 1), tr);
    });
    K = K.selfadjointView<Eigen::Lower>();

    double jitter = 1e-12 * K.trace() / k;
    Eigen::LLT<Eigen::MatrixXd> llt;
    bool ok = false;
    for (int attempt = 0; attempt <= 3; ++attempt) {
        Eigen::MatrixXd Kj = K;
        Kj.diagonal().array() += jitter;
        llt.compute(Kj);
        if (llt.info() == Eigen::Success) {
            ok = true;
            break;
        }
        jitter *= 10.0;
    }
    if (!ok) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K,
                                                          Eigen::EigenvaluesOnly);
        throw std::runtime_error(
            "simulate_gaussian: covariance not PSD after jitter escalation; "
            "worst eigenvalue ~ " +
            std::to_string(es.eigenvalues().minCoeff()));
    }
    Eigen::MatrixXd L = llt.matrixL();

    PathEnsemble out;
    out.grid = grid;
    out.seed = seed;
    out.model_digest = model.spec().digest();
    out.values.setZero(n, n_paths);

    // Fixed 64-path blocks: the per-block product is identical whatever the
    // worker count, so ensembles are bit-reproducible.
    const int block = 64;
    int n_blocks = (n_paths + block - 1) / block;
    parallelFor((std::size_t)n_blocks, [&](std::size_t bi) {
        int p0 = (int)bi * block;
        int nb = std::min(block, n_paths - p0);
        Eigen::MatrixXd Z(k, nb);
        for (int j = 0; j < nb; ++j) {
            CounterRng rng(seed, RngStream::GaussianPath, (std::uint64_t)(p0 + j));
            for (int i = 0; i < k; ++i) Z(i, j) = rng.normal((std::uint64_t)i);
        }
        out.values.block(1, p0, k, nb).noalias() = L * Z;
    });
    return out;
}

namespace {

struct ConvolutionKernel {
    std::vector<double> weight;  // weight[j], j >= 1: G at lag (j - 1/2) dt
    const KernelSpec* scale_of = nullptr;  // ScaledMartingale: Gamma source

    static ConvolutionKernel build(const KernelSpec& spec, double dt, int len) {
        ConvolutionKernel ck;
        const KernelSpec* shape =
            spec.family == KernelFamily::ScaledMartingale ? spec.base.get() : &spec;
        if (spec.family == KernelFamily::ScaledMartingale) ck.scale_of = &spec;
        ck.weight.resize((std::size_t)len + 1, 0.0);
        for (int j = 1; j <= len; ++j) {
            double lag = dt * (j - 0.5);
            ck.weight[(std::size_t)j] =
                shape->family == KernelFamily::RLfBm
                    ? std::pow(lag, shape->hurst - 0.5)
                    : std::sqrt(shape->gamma2.derivative(lag));
        }
        return ck;
    }
};

}  // namespace

PathEnsemble simulate_martingale_volterra(const KernelSpec& kernel,
                                          const DriverSpec& driver,
                                          const TimeGrid& grid, int inner_refine,
                                          int n_paths, std::uint64_t seed) {
    grid.validate();
    kernel.validate();
    if (!kernel.causal())
        throw std::invalid_argument(
            "simulate_martingale_volterra: kernel must be causal");
    if (inner_refine < 4 || inner_refine > 4096 ||
        (inner_refine & (inner_refine - 1)) != 0)
        throw std::invalid_argument(
            "simulate_martingale_volterra: inner_refine must be a power of two "
            "in [4, 4096]");
    if (n_paths < 1)
        throw std::invalid_argument("simulate_martingale_volterra: n_paths < 1");

    const int n = grid.n;
    const int R = inner_refine;
    const double dt = grid.step() / R;
    const int n_inner = (n - 1) * R;
    int levels = 0;
    while ((1 << levels) < R) ++levels;

    ConvolutionKernel ck = ConvolutionKernel::build(kernel, dt, n_inner);

    PathEnsemble out;
    out.grid = grid;
    out.seed = seed;
    out.model_digest = kernel.digest();
    out.values.setZero(n, n_paths);

    std::vector<std::string> errors((std::size_t)n_paths);
    parallelFor((std::size_t)n_paths, [&](std::size_t p) {
        CounterRng rng(seed, RngStream::DriverIncrements, p);
        // Driver increments by Levy midpoint displacement: level 0 holds one
        // increment per grid step, each level halves the interval. A path
        // simulated at inner_refine R is, node for node, a refinement of the
        // same path at any coarser power of two, which is what the
        // refinement-stability checks rely on.
        std::vector<double> dW((std::size_t)(n - 1));
        for (int i = 0; i < n - 1; ++i)
            dW[(std::size_t)i] =
                std::sqrt(grid.step()) * rng.normal(((std::uint64_t)0 << 48) | (std::uint64_t)i);
        for (int level = 1; level <= levels; ++level) {
            std::size_t count = dW.size();
            double len = grid.step() * std::ldexp(1.0, -(level - 1));
            double half_sd = 0.5 * std::sqrt(len);
            std::vector<double> fine(2 * count);
            for (std::size_t j = 0; j < count; ++j) {
                double xi = rng.normal(((std::uint64_t)level << 48) | (std::uint64_t)j);
                double left = 0.5 * dW[j] + half_sd * xi;
                fine[2 * j] = left;
                fine[2 * j + 1] = dW[j] - left;
            }
            dW.swap(fine);
        }
        std::vector<double> dM((std::size_t)n_inner);
        double w_level = 0.0;  // driver value at the current inner node
        for (int kk = 0; kk < n_inner; ++kk) {
            double dw = dW[(std::size_t)kk];
            double s = kk * dt;
            double hval = driver.h(s, w_level);
            if (ck.scale_of) hval *= ck.scale_of->gamma(s + 0.5 * dt);
            dM[(std::size_t)kk] = hval * dw;
            w_level += dw;
        }
        for (int i = 1; i < n; ++i) {
            int upto = i * R;
            double acc = 0.0;
            for (int kk = 0; kk < upto; ++kk)
                acc += ck.weight[(std::size_t)(upto - kk)] * dM[(std::size_t)kk];
            out.values(i, (Eigen::Index)p) = acc;
        }
        if (!out.values.col((Eigen::Index)p).allFinite()) {
            for (int i = 1; i < n; ++i) {
                if (std::isfinite(out.values(i, (Eigen::Index)p))) continue;
                int bad_k = -1;
                for (int kk = 0; kk < i * R; ++kk)
                    if (!std::isfinite(ck.weight[(std::size_t)(i * R - kk)] *
                                       dM[(std::size_t)kk])) {
                        bad_k = kk;
                        break;
                    }
                errors[p] = "non-finite value at t=" + std::to_string(grid.time(i)) +
                            ", s=" + std::to_string(bad_k * dt);
                break;
            }
        }
    });
    for (auto& e : errors)
        if (!e.empty())
            throw std::runtime_error("simulate_martingale_volterra: " + e);
    return out;
}

}  // namespace powvar
