#pragma once

#include <chrono>
#include <cmath>
#include <future>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "agrivote/errors.hpp"
#include "agrivote/models.hpp"
#include "agrivote/util.hpp"

namespace agrivote {

/// Round-half-up of 1000/ms.
inline int fps_from_latency(double ms) {
    require(std::isfinite(ms) && ms > 0.0, ErrorCode::BadLatency,
            "latency must be positive, got " + format_double(ms));
    return static_cast<int>(std::floor(1000.0 / ms + 0.5));
}

struct BenchmarkResult {
    std::string model_tag;
    double mean_latency_ms = 0.0;
    int fps = 0;
    std::size_t num_samples = 0;
    std::size_t warmup_samples = 0;
    std::string mode = "sequential";
    std::string device;
};

// ---------------------------------------------------------------------------
// Clocks. The steady clock is the default; the manual clock lets tests inject
// exact latencies and verify warmup exclusion.
// ---------------------------------------------------------------------------

struct SteadyClock {
    double now_ms() const {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now().time_since_epoch())
            .count();
    }
};

struct ManualClock {
    double current_ms = 0.0;
    double now_ms() const { return current_ms; }
    void advance(double ms) { current_ms += ms; }
};

inline std::string device_descriptor() {
    return "cpu(" + std::to_string(std::thread::hardware_concurrency()) + " hw threads)";
}

/// Keeps the compiler from eliding a computed result inside the timed region.
inline void consume(const void* pointer) { asm volatile("" : : "g"(pointer) : "memory"); }

/// Core timing loop, batch size 1. step(i) runs one per-image inference;
/// iterations below `warmup` run untimed. On the CPU backend every step
/// completes synchronously before the clock is read again, so there is no
/// asynchronous work left outside the timed window.
template <typename Clock, typename Step>
BenchmarkResult measure_per_image(const std::string& tag, std::size_t samples, std::size_t warmup,
                                  Clock& clock, Step&& step) {
    require(samples >= 1, ErrorCode::InsufficientSamples, "need at least 1 timed sample");
    for (std::size_t i = 0; i < warmup; ++i) step(i);
    double total_ms = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t0 = clock.now_ms();
        step(warmup + i);
        total_ms += clock.now_ms() - t0;
    }
    BenchmarkResult result;
    result.model_tag = tag;
    result.mean_latency_ms = total_ms / static_cast<double>(samples);
    result.fps = fps_from_latency(result.mean_latency_ms);
    result.num_samples = samples;
    result.warmup_samples = warmup;
    result.device = device_descriptor();
    return result;
}

namespace detail {

inline void check_sample_pool(std::size_t pool_size, std::size_t samples) {
    require(pool_size >= samples, ErrorCode::InsufficientSamples,
            "need " + std::to_string(samples) + " images, got " + std::to_string(pool_size));
}

}  // namespace detail

template <typename Clock = SteadyClock>
BenchmarkResult bench_model(const AdaptedModel& model, std::span<const Tensor3> images,
                            std::size_t samples, std::size_t warmup, Clock clock = Clock{}) {
    detail::check_sample_pool(images.size(), samples);
    const std::size_t pool = images.size();
    return measure_per_image(model.tag(), samples, warmup, clock, [&](std::size_t i) {
        const Eigen::VectorXd probs = forward_single(model, images[i % pool]);
        consume(probs.data());
    });
}

/// Times the full ensemble per image: every member forward plus the
/// equal-weight combine, sequentially, matching the sum-of-members protocol.
/// The concurrent mode overlaps the member forwards and is NOT comparable to
/// sequential numbers; results carry mode="concurrent" to flag that.
template <typename Clock = SteadyClock>
BenchmarkResult bench_ensemble(std::span<const AdaptedModel> models,
                               std::span<const Tensor3> images, std::size_t samples,
                               std::size_t warmup, bool concurrent = false,
                               Clock clock = Clock{}) {
    require(!models.empty(), ErrorCode::NoModels, "no models to benchmark");
    detail::check_sample_pool(images.size(), samples);
    const std::size_t pool = images.size();
    const std::size_t M = models.size();
    const int C = models.front().spec.num_classes;
    for (const AdaptedModel& m : models)
        require(m.spec.num_classes == C, ErrorCode::AlignmentError,
                "models disagree on class count");

    std::vector<Eigen::VectorXd> member_probs(M);
    const auto combine = [&]() {
        Eigen::VectorXd vote = Eigen::VectorXd::Zero(C);
        for (const Eigen::VectorXd& p : member_probs) vote += p;
        vote /= static_cast<double>(M);
        consume(vote.data());
    };

    const std::string tag = "ensemble(" + std::to_string(M) + "-model)";
    BenchmarkResult result;
    if (concurrent) {
        result = measure_per_image(tag, samples, warmup, clock, [&](std::size_t i) {
            const Tensor3& image = images[i % pool];
            std::vector<std::future<Eigen::VectorXd>> futures;
            futures.reserve(M);
            for (std::size_t m = 0; m < M; ++m)
                futures.push_back(std::async(std::launch::async, [&, m] {
                    return forward_single(models[m], image);
                }));
            for (std::size_t m = 0; m < M; ++m) member_probs[m] = futures[m].get();
            combine();
        });
        result.mode = "concurrent";
    } else {
        result = measure_per_image(tag, samples, warmup, clock, [&](std::size_t i) {
            const Tensor3& image = images[i % pool];
            for (std::size_t m = 0; m < M; ++m) member_probs[m] = forward_single(models[m], image);
            combine();
        });
    }
    return result;
}

// ---------------------------------------------------------------------------
// Bench CSV (model, time, fps first, mirroring the usual latency tables)
// ---------------------------------------------------------------------------

inline std::string bench_to_csv(const std::vector<BenchmarkResult>& results) {
    std::string out = "model,time_ms_per_image,fps,num_samples,warmup,mode,device\n";
    for (const BenchmarkResult& r : results) {
        out += r.model_tag + "," + format_fixed(r.mean_latency_ms, 3) + "," +
               std::to_string(r.fps) + "," + std::to_string(r.num_samples) + "," +
               std::to_string(r.warmup_samples) + "," + r.mode + "," + r.device + "\n";
    }
    return out;
}

inline std::vector<BenchmarkResult> parse_bench_csv(std::string_view text) {
    const std::vector<std::string> lines = split_lines(text);
    require(!lines.empty() &&
                lines[0] == "model,time_ms_per_image,fps,num_samples,warmup,mode,device",
            ErrorCode::ParseError, "bench CSV header missing");
    std::vector<BenchmarkResult> results;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_string(lines[i], ',');
        require(fields.size() == 7, ErrorCode::ParseError, "bad bench CSV row: " + lines[i]);
        BenchmarkResult r;
        r.model_tag = fields[0];
        r.mean_latency_ms = parse_double(fields[1], "bench csv");
        r.fps = static_cast<int>(parse_int(fields[2], "bench csv"));
        r.num_samples = static_cast<std::size_t>(parse_int(fields[3], "bench csv"));
        r.warmup_samples = static_cast<std::size_t>(parse_int(fields[4], "bench csv"));
        r.mode = fields[5];
        r.device = fields[6];
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace agrivote
