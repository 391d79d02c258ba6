#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sigabc {

/**
 * An ordered sequence of (time, value-vector) samples.
 *
 * Values are stored row-major: sample i occupies
 * values()[i * dim() .. (i + 1) * dim()).  Construction validates that there is
 * at least one sample and one channel, that times are strictly increasing and
 * that every entry is finite.
 */
class TimeSeries {
public:
    TimeSeries(std::vector<double> times, std::vector<double> values, std::size_t dim);

    /// Integer grid 0, 1, ..., n-1 as times.
    static TimeSeries on_index_grid(std::vector<double> values, std::size_t dim);

    std::size_t size() const noexcept { return times_.size(); }
    std::size_t dim() const noexcept { return dim_; }

    double time(std::size_t i) const { return times_[i]; }
    double value(std::size_t i, std::size_t c) const { return values_[i * dim_ + c]; }
    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * dim_, dim_};
    }

    const std::vector<double>& times() const noexcept { return times_; }
    const std::vector<double>& values() const noexcept { return values_; }

    /// Single channel as a contiguous vector.
    std::vector<double> channel(std::size_t c) const;

    bool operator==(const TimeSeries&) const = default;

private:
    std::vector<double> times_;
    std::vector<double> values_;
    std::size_t dim_;
};

/// Prepends the time index as channel 0.
TimeSeries time_augment(const TimeSeries& ts);

/// Prepends a zero sample one median time step before the first sample.
TimeSeries basepoint_augment(const TimeSeries& ts);

/// Lead-lag embedding: 2n-1 samples, channels [lag block | lead block], times 0..2n-2.
TimeSeries lead_lag(const TimeSeries& ts);

/// Running sum per channel.
TimeSeries cumulative_sum(const TimeSeries& ts);

/// Divides channel c by range[c].  Every range entry must be positive.
TimeSeries range_normalize(const TimeSeries& ts, std::span<const double> range);

/// Median of all pairwise Euclidean distances between samples.
double median_pairwise_distance(const TimeSeries& ts);

/// Per-channel (max - min) over all samples of all series.
std::vector<double> channel_ranges(std::span<const TimeSeries> series);

enum class TransformKind { CumulativeSum, LeadLag, TimeAugment, BasepointAugment, RangeNormalize };

struct Transform {
    TransformKind kind;
    /// RangeNormalize only.  Empty means "not fitted yet" (see fit_ranges).
    std::vector<double> range;

    static Transform of(TransformKind k) { return {k, {}}; }
    bool operator==(const Transform&) const = default;
};

/**
 * Ordered list of transforms, applied first to last.
 *
 * Pipeline tags in text form: "cumsum", "leadlag", "time", "basepoint",
 * "normalize".  An unfitted "normalize" step must be resolved with fit_ranges()
 * before apply() is called.
 */
class TransformPipeline {
public:
    TransformPipeline() = default;
    explicit TransformPipeline(std::vector<Transform> steps) : steps_(std::move(steps)) {}

    static TransformPipeline parse(const std::vector<std::string>& tags);
    std::vector<std::string> tags() const;

    TimeSeries apply(const TimeSeries& ts) const;

    /// True if every RangeNormalize step carries a range.
    bool fitted() const;

    /// Fills each unfitted RangeNormalize step with channel ranges of the
    /// samples pushed through the preceding steps.  Zero-width channels get range 1.
    TransformPipeline fit_ranges(std::span<const TimeSeries> samples) const;

    const std::vector<Transform>& steps() const noexcept { return steps_; }
    bool operator==(const TransformPipeline&) const = default;

private:
    std::vector<Transform> steps_;
};

/// CSV with header `t,v1,...,vd`; values written in shortest round-trip form.
std::string to_csv(const TimeSeries& ts);
TimeSeries from_csv(const std::string& text);

void write_csv(const TimeSeries& ts, const std::string& path);
TimeSeries read_csv(const std::string& path);

}  // namespace sigabc
