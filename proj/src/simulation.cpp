#include "bistatic/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace bistatic {

namespace {

// Stream tags keep the campaigns' random streams disjoint for the same seed.
constexpr std::uint64_t kBiasStream = 0x6269'6173;
constexpr std::uint64_t kNeesStream = 0x6e65'6573;
constexpr std::uint64_t kTrackStream = 0x7472'6b00;

constexpr std::size_t kBiasBlock = 4096;
constexpr std::size_t kNeesBlock = 1024;
constexpr std::size_t kTrackBlock = 25;

// Runs fn(block) for every block index; each block writes only its own slot, so results
// are independent of the thread count.
template <typename Fn>
void for_each_block(std::size_t blocks, std::size_t threads, Fn&& fn) {
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(blocks, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < blocks; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < blocks; i = next++) {
                fn(i);
            }
        });
    }
}

std::size_t block_count(std::size_t n, std::size_t block) { return (n + block - 1) / block; }

void require_positive(std::size_t value, const char* name) {
    if (value == 0) {
        throw std::invalid_argument(fmt::format("{} must be positive", name));
    }
}

void require_positive_noise(const NoiseSpec& noise) {
    validate(noise);
    if (!(noise.sigma_b > 0.0) || !(noise.sigma_alpha > 0.0)) {
        throw std::invalid_argument("NEES campaigns need strictly positive measurement noise");
    }
}

NoisyMeasurement draw_measurement(const BistaticPoint& truth, const NoiseSpec& noise, Rng& rng) {
    NoisyMeasurement m;
    m.b_m = truth.b + noise.sigma_b * rng.normal();
    m.alpha_m = truth.alpha + noise.sigma_alpha * rng.normal();
    m.noise = noise;
    return m;
}

std::uint64_t fold(std::uint64_t h, double v) {
    return (h ^ std::bit_cast<std::uint64_t>(v)) * 0x100000001b3ULL;
}

Eigen::Vector2d error_of(const CartesianPoint& estimate, const CartesianPoint& truth) {
    return {estimate.x - truth.x, estimate.y - truth.y};
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    engine_.seed(seq);
}

void validate(const ScenarioConfig& cfg) {
    validate(cfg.geometry);
    require_positive_noise(cfg.noise);
    require_positive(cfg.scans, "scan count");
    require_positive(cfg.runs, "run count");
    if (!(cfg.period > 0.0)) {
        throw std::invalid_argument("sampling period must be positive");
    }
    if (!(cfg.initial_speed >= 0.0)) {
        throw std::invalid_argument("initial speed must be >= 0");
    }
    if (cfg.methods.empty()) {
        throw std::invalid_argument("at least one tracking method is required");
    }
}

void validate(const StaticBiasConfig& cfg) {
    validate(cfg.geometry);
    validate(cfg.noise);
    require_positive(cfg.runs, "run count");
    require_positive(cfg.histogram_bins, "histogram bin count");
    if (cfg.bearings.empty()) {
        throw std::invalid_argument("bearing grid is empty");
    }
    if (!(cfg.b > cfg.geometry.min_valid_range())) {
        throw std::invalid_argument("bistatic range must exceed the baseline");
    }
}

void validate(const StaticSweepConfig& cfg) {
    validate(cfg.geometry);
    require_positive(cfg.runs, "run count");
    if (cfg.grid.empty()) {
        throw std::invalid_argument("sweep grid is empty");
    }
    for (double v : cfg.grid) {
        require_positive_noise(sweep_noise(cfg, v));
        if (!(sweep_truth(cfg, v).b > cfg.geometry.min_valid_range())) {
            throw std::invalid_argument(fmt::format("grid value {} gives a range sum inside the baseline", v));
        }
    }
    const Eigen::LLT<Eigen::Matrix2d> llt(cfg.prediction_shape);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("prediction shape must be positive definite");
    }
}

double bisector_bearing(double b, const BistaticGeometry& geom) {
    const double half = 0.5 * geom.baseline;
    const double y = std::sqrt(std::max(0.0, 0.25 * b * b - half * half));
    return std::atan2(y, half);
}

BistaticPoint sweep_truth(const StaticSweepConfig& cfg, double v) {
    BistaticPoint z{cfg.b, cfg.alpha};
    if (cfg.swept == SweepParameter::b) {
        z.b = v;
    } else if (cfg.swept == SweepParameter::alpha) {
        z.alpha = v;
    }
    if (cfg.perpendicular_bisector) {
        z.alpha = bisector_bearing(z.b, cfg.geometry);
    }
    return z;
}

NoiseSpec sweep_noise(const StaticSweepConfig& cfg, double v) {
    NoiseSpec n = cfg.noise;
    if (cfg.swept == SweepParameter::sigma_b) {
        n.sigma_b = v;
    } else if (cfg.swept == SweepParameter::sigma_alpha) {
        n.sigma_alpha = v;
    }
    return n;
}

StateMatrix psd_sqrt(const StateMatrix& q) {
    const Eigen::SelfAdjointEigenSolver<StateMatrix> eig(0.5 * (q + q.transpose()));
    const Eigen::Vector4d roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

std::vector<StateVector> generate_trajectory(const ScenarioConfig& cfg, Rng& rng) {
    const double heading =
        cfg.heading_policy == HeadingPolicy::random_uniform ? rng.uniform(0.0, 2.0 * std::numbers::pi) : cfg.fixed_heading;
    const MotionModel model = dcwna_model(cfg.period, cfg.accel_var);
    const StateMatrix noise_factor = psd_sqrt(model.process_noise);

    std::vector<StateVector> truth;
    truth.reserve(cfg.scans);
    StateVector x;
    x << cfg.initial_position.x, cfg.initial_speed * std::cos(heading), cfg.initial_position.y,
        cfg.initial_speed * std::sin(heading);
    truth.push_back(x);
    for (std::size_t k = 1; k < cfg.scans; ++k) {
        x = model.transition * x;
        if (cfg.truth_process_noise) {
            const StateVector n(rng.normal(), rng.normal(), rng.normal(), rng.normal());
            x += noise_factor * n;
        }
        truth.push_back(x);
    }
    return truth;
}

NoisyMeasurement generate_measurement(const CartesianPoint& truth, const NoiseSpec& noise, const BistaticGeometry& geom,
                                      Rng& rng) {
    return draw_measurement(to_measurement(truth, geom), noise, rng);
}

CampaignStatistics run_static_bias_campaign(const StaticBiasConfig& cfg) {
    validate(cfg);
    CampaignStatistics stats;
    stats.runs = cfg.runs;

    const std::size_t blocks = block_count(cfg.runs, kBiasBlock);
    for (std::size_t bi = 0; bi < cfg.bearings.size(); ++bi) {
        const BistaticPoint z{cfg.b, cfg.bearings[bi]};
        const CartesianPoint truth = to_cartesian(z, cfg.geometry);

        // Histogram window: truth +- 5 sigma of the converted spread, widened by the bias term.
        const NoisyMeasurement at_truth{z.b, z.alpha, cfg.noise};
        const Eigen::Matrix2d spread = ucm_covariance(at_truth, cfg.geometry);
        const CartesianPoint debiased = ucm_position(at_truth, cfg.geometry);
        const double half_x = 5.0 * std::sqrt(spread(0, 0)) + std::abs(truth.x - debiased.x) + 1.0;
        const double half_y = 5.0 * std::sqrt(spread(1, 1)) + std::abs(truth.y - debiased.y) + 1.0;
        const Histogram2d empty_hist(truth.x - half_x, truth.x + half_x, truth.y - half_y, truth.y + half_y,
                                     cfg.histogram_bins);

        struct Block {
            MomentAccumulator2 conventional;
            MomentAccumulator2 ucm;
            Histogram2d hist;
            EventCounts events;
        };
        std::vector<Block> partial(blocks, Block{{}, {}, empty_hist, {}});

        for_each_block(blocks, cfg.threads, [&](std::size_t block) {
            Rng rng(cfg.seed, kBiasStream, (static_cast<std::uint64_t>(bi) << 32) | block);
            Block& out = partial[block];
            const std::size_t n = std::min(kBiasBlock, cfg.runs - block * kBiasBlock);
            for (std::size_t i = 0; i < n; ++i) {
                NoisyMeasurement m = draw_measurement(z, cfg.noise, rng);
                if (clamp_to_valid(m, cfg.geometry)) {
                    ++out.events.clamped_measurements;
                }
                const CartesianPoint conv = to_cartesian(m.point(), cfg.geometry);
                out.conventional.add(error_of(conv, truth));
                out.ucm.add(error_of(ucm_position(m, cfg.geometry), truth));
                out.hist.add(conv.x, conv.y);
            }
        });

        Block total{{}, {}, empty_hist, {}};
        for (const Block& p : partial) {
            total.conventional += p.conventional;
            total.ucm += p.ucm;
            for (std::size_t i = 0; i < total.hist.counts.size(); ++i) {
                total.hist.counts[i] += p.hist.counts[i];
            }
            total.events += p.events;
        }
        stats.events += total.events;
        stats.total_measurements += cfg.runs;

        for (Method method : kAllMethods) {
            const MomentAccumulator2& acc = method == Method::conventional ? total.conventional : total.ucm;
            BiasEstimate est;
            est.bearing = z.alpha;
            est.method = method;
            est.truth = truth;
            est.mean = Eigen::Vector2d(truth.x, truth.y) + acc.mean();
            est.standard_error = acc.standard_error();
            est.n = acc.count;
            stats.bias.push_back(est);
        }
        stats.histograms.push_back({z.alpha, std::move(total.hist)});
    }
    return stats;
}

CampaignStatistics run_static_nees_campaign(const StaticSweepConfig& cfg) {
    validate(cfg);
    CampaignStatistics stats;
    stats.runs = cfg.runs;
    stats.nees_bounds = chi2_mean_bounds(cfg.runs, 2, 0.99);

    const std::size_t blocks = block_count(cfg.runs, kNeesBlock);
    for (std::size_t gi = 0; gi < cfg.grid.size(); ++gi) {
        const double value = cfg.grid[gi];
        const BistaticPoint z = sweep_truth(cfg, value);
        const NoiseSpec noise = sweep_noise(cfg, value);
        const CartesianPoint truth = to_cartesian(z, cfg.geometry);
        const Eigen::Matrix2d p_t = noise.sigma_b * noise.sigma_b * cfg.prediction_shape;
        const Eigen::Matrix2d p_t_factor = Eigen::LLT<Eigen::Matrix2d>(p_t).matrixL();

        struct Block {
            ScalarAccumulator nees[3];
            EventCounts events;
        };
        std::vector<Block> partial(blocks);

        for_each_block(blocks, cfg.threads, [&](std::size_t block) {
            Rng rng(cfg.seed, kNeesStream, (static_cast<std::uint64_t>(gi) << 32) | block);
            Block& out = partial[block];
            const std::size_t n = std::min(kNeesBlock, cfg.runs - block * kNeesBlock);
            for (std::size_t i = 0; i < n; ++i) {
                NoisyMeasurement m = draw_measurement(z, noise, rng);
                if (clamp_to_valid(m, cfg.geometry)) {
                    ++out.events.clamped_measurements;
                }
                const Eigen::Vector2d offset = p_t_factor * Eigen::Vector2d(rng.normal(), rng.normal());
                TrackState predicted;
                predicted.state << truth.x + offset(0), 0.0, truth.y + offset(1), 0.0;
                predicted.covariance.setZero();
                predicted.covariance(0, 0) = p_t(0, 0);
                predicted.covariance(0, 2) = p_t(0, 1);
                predicted.covariance(2, 0) = p_t(1, 0);
                predicted.covariance(2, 2) = p_t(1, 1);

                for (Method method : kAllMethods) {
                    const ConvertedMeasurement cm = convert_for_track(predicted, m, method, cfg.geometry, &out.events);
                    const Eigen::Vector2d e = error_of(cm.position, truth);
                    out.nees[static_cast<int>(method)].add(normalized_error_squared<2>(e, cm.covariance) / 2.0);
                }
            }
        });

        ScalarAccumulator totals[3];
        for (const Block& p : partial) {
            for (int k = 0; k < 3; ++k) {
                totals[k] += p.nees[k];
            }
            stats.events += p.events;
        }
        stats.total_measurements += cfg.runs;
        for (Method method : kAllMethods) {
            const ScalarAccumulator& acc = totals[static_cast<int>(method)];
            stats.static_nees.push_back({value, method, acc.mean(), acc.count});
        }
    }
    return stats;
}

TrackingShard& TrackingShard::operator+=(const TrackingShard& other) {
    if (per_method.size() != other.per_method.size()) {
        throw std::invalid_argument("TrackingShard: method counts differ");
    }
    runs += other.runs;
    events += other.events;
    total_measurements += other.total_measurements;
    for (std::size_t i = 0; i < per_method.size(); ++i) {
        per_method[i] += other.per_method[i];
        checksums[i] += other.checksums[i];
    }
    return *this;
}

TrackingShard run_tracking_shard(const ScenarioConfig& cfg, std::size_t first_run, std::size_t last_run) {
    validate(cfg);
    const MotionModel model = dcwna_model(cfg.period, cfg.accel_var);

    TrackingShard shard;
    shard.per_method.assign(cfg.methods.size(), ScanAccumulator(cfg.scans));
    shard.checksums.assign(cfg.methods.size(), 0);

    std::vector<NoisyMeasurement> measurements(cfg.scans);
    for (std::size_t run = first_run; run < last_run; ++run) {
        Rng rng(cfg.seed, kTrackStream, run);
        const std::vector<StateVector> truth = generate_trajectory(cfg, rng);
        for (std::size_t k = 0; k < cfg.scans; ++k) {
            const CartesianPoint pos{truth[k](0), truth[k](2)};
            measurements[k] = generate_measurement(pos, cfg.noise, cfg.geometry, rng);
            if (clamp_to_valid(measurements[k], cfg.geometry)) {
                ++shard.events.clamped_measurements;
            }
        }
        shard.total_measurements += cfg.scans;

        for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
            const Method method = cfg.methods[mi];
            ScanAccumulator& acc = shard.per_method[mi];
            std::uint64_t checksum = 0xcbf29ce484222325ULL;

            const NoisyMeasurement& first = measurements[0];
            checksum = fold(fold(checksum, first.b_m), first.alpha_m);
            const ConvertedMeasurement initial =
                method == Method::conventional ? convert_conventional(first, cfg.geometry) : convert_ucm(first, cfg.geometry);
            if (initial.psd_repaired) {
                ++shard.events.psd_repairs;
            }
            TrackState track = initialize(initial);
            acc.add(0, truth[0], track);

            for (std::size_t k = 1; k < cfg.scans; ++k) {
                const NoisyMeasurement& m = measurements[k];
                checksum = fold(fold(checksum, m.b_m), m.alpha_m);
                track = step(track, m, method, model, cfg.geometry, &shard.events);
                acc.add(k, truth[k], track);
            }
            shard.checksums[mi] += checksum;
        }
        ++shard.runs;
    }
    return shard;
}

CampaignStatistics summarize_tracking(const ScenarioConfig& cfg, const TrackingShard& shard) {
    CampaignStatistics stats;
    stats.runs = shard.runs;
    stats.events = shard.events;
    stats.total_measurements = shard.total_measurements;
    stats.nees_bounds = chi2_mean_bounds(std::max<std::size_t>(shard.runs, 1), 4, 0.99);
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        const ScanAccumulator& acc = shard.per_method[mi];
        ScanSeries series;
        series.method = cfg.methods[mi];
        series.measurement_checksum = shard.checksums[mi];
        for (std::size_t k = 0; k < cfg.scans; ++k) {
            series.rmse_pos.push_back(std::sqrt(acc.pos_sq[k].mean()));
            series.rmse_vel.push_back(std::sqrt(acc.vel_sq[k].mean()));
            series.nees.push_back(acc.nees[k].mean());
        }
        stats.tracking.push_back(std::move(series));
    }
    return stats;
}

CampaignStatistics run_tracking_campaign(const ScenarioConfig& cfg) {
    validate(cfg);
    const std::size_t blocks = block_count(cfg.runs, kTrackBlock);
    std::vector<TrackingShard> partial(blocks);
    for_each_block(blocks, cfg.threads, [&](std::size_t block) {
        const std::size_t first = block * kTrackBlock;
        partial[block] = run_tracking_shard(cfg, first, std::min(cfg.runs, first + kTrackBlock));
    });
    TrackingShard total = std::move(partial.front());
    for (std::size_t i = 1; i < partial.size(); ++i) {
        total += partial[i];
    }
    return summarize_tracking(cfg, total);
}

}  // namespace bistatic
