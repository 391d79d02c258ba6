#include "sigabc/streams.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sigabc/error.hpp"
#include "sigabc/util.hpp"

namespace sigabc {

using detail::require;

TimeSeries::TimeSeries(std::vector<double> times, std::vector<double> values, std::size_t dim)
    : times_(std::move(times)), values_(std::move(values)), dim_(dim) {
    require(dim_ >= 1, "time series needs at least one channel");
    require(!times_.empty(), "time series needs at least one sample");
    require(values_.size() == times_.size() * dim_,
            "time series values do not match times x channels");
    for (std::size_t i = 0; i < times_.size(); ++i) {
        require(std::isfinite(times_[i]), "non-finite time in time series");
        if (i > 0) require(times_[i] > times_[i - 1], "time series times must be strictly increasing");
    }
    for (double v : values_) require(std::isfinite(v), "non-finite value in time series");
}

TimeSeries TimeSeries::on_index_grid(std::vector<double> values, std::size_t dim) {
    require(dim >= 1 && values.size() % dim == 0, "values are not a whole number of rows");
    std::vector<double> t(values.size() / dim);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
    return TimeSeries(std::move(t), std::move(values), dim);
}

std::vector<double> TimeSeries::channel(std::size_t c) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = value(i, c);
    return out;
}

TimeSeries time_augment(const TimeSeries& ts) {
    const std::size_t n = ts.size(), d = ts.dim();
    std::vector<double> v;
    v.reserve(n * (d + 1));
    for (std::size_t i = 0; i < n; ++i) {
        v.push_back(ts.time(i));
        auto r = ts.row(i);
        v.insert(v.end(), r.begin(), r.end());
    }
    return TimeSeries(ts.times(), std::move(v), d + 1);
}

TimeSeries basepoint_augment(const TimeSeries& ts) {
    const std::size_t n = ts.size(), d = ts.dim();
    double step = 1.0;
    if (n >= 2) {
        std::vector<double> steps(n - 1);
        for (std::size_t i = 1; i < n; ++i) steps[i - 1] = ts.time(i) - ts.time(i - 1);
        step = median(std::move(steps));
    }
    std::vector<double> t;
    t.reserve(n + 1);
    t.push_back(ts.time(0) - step);
    t.insert(t.end(), ts.times().begin(), ts.times().end());
    std::vector<double> v(d, 0.0);
    v.insert(v.end(), ts.values().begin(), ts.values().end());
    return TimeSeries(std::move(t), std::move(v), d);
}

TimeSeries lead_lag(const TimeSeries& ts) {
    const std::size_t n = ts.size(), d = ts.dim();
    require(n >= 2, "lead-lag needs at least two samples");
    std::vector<double> v;
    v.reserve((2 * n - 1) * 2 * d);
    for (std::size_t k = 0; k < 2 * n - 1; ++k) {
        const std::size_t lag = k / 2;
        const std::size_t lead = (k + 1) / 2;
        auto a = ts.row(lag);
        auto b = ts.row(lead);
        v.insert(v.end(), a.begin(), a.end());
        v.insert(v.end(), b.begin(), b.end());
    }
    return TimeSeries::on_index_grid(std::move(v), 2 * d);
}

TimeSeries cumulative_sum(const TimeSeries& ts) {
    std::vector<double> v = ts.values();
    const std::size_t d = ts.dim();
    for (std::size_t i = 1; i < ts.size(); ++i)
        for (std::size_t c = 0; c < d; ++c) v[i * d + c] += v[(i - 1) * d + c];
    return TimeSeries(ts.times(), std::move(v), d);
}

TimeSeries range_normalize(const TimeSeries& ts, std::span<const double> range) {
    const std::size_t d = ts.dim();
    require(range.size() == d, "normalisation range has " + std::to_string(range.size()) +
                                   " entries for " + std::to_string(d) + " channels");
    for (double r : range) require(std::isfinite(r) && r > 0.0, "normalisation range entries must be positive");
    std::vector<double> v = ts.values();
    for (std::size_t i = 0; i < ts.size(); ++i)
        for (std::size_t c = 0; c < d; ++c) v[i * d + c] /= range[c];
    return TimeSeries(ts.times(), std::move(v), d);
}

double median_pairwise_distance(const TimeSeries& ts) {
    const std::size_t n = ts.size(), d = ts.dim();
    require(n >= 2, "pairwise distances need at least two samples");
    std::vector<double> dist;
    dist.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = ts.value(i, c) - ts.value(j, c);
                s += diff * diff;
            }
            dist.push_back(std::sqrt(s));
        }
    }
    return median(std::move(dist));
}

std::vector<double> channel_ranges(std::span<const TimeSeries> series) {
    require(!series.empty(), "channel ranges of an empty collection");
    const std::size_t d = series.front().dim();
    std::vector<double> lo(d, std::numeric_limits<double>::infinity());
    std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
    for (const auto& ts : series) {
        require(ts.dim() == d, "channel ranges over series of different dimension");
        for (std::size_t i = 0; i < ts.size(); ++i)
            for (std::size_t c = 0; c < d; ++c) {
                lo[c] = std::min(lo[c], ts.value(i, c));
                hi[c] = std::max(hi[c], ts.value(i, c));
            }
    }
    std::vector<double> r(d);
    for (std::size_t c = 0; c < d; ++c) r[c] = hi[c] - lo[c];
    return r;
}

// --- pipeline ---------------------------------------------------------------

namespace {

struct TagName {
    TransformKind kind;
    const char* name;
};
constexpr TagName kTags[] = {
    {TransformKind::CumulativeSum, "cumsum"},
    {TransformKind::LeadLag, "leadlag"},
    {TransformKind::TimeAugment, "time"},
    {TransformKind::BasepointAugment, "basepoint"},
    {TransformKind::RangeNormalize, "normalize"},
};

TimeSeries apply_step(const Transform& t, const TimeSeries& ts) {
    switch (t.kind) {
        case TransformKind::CumulativeSum: return cumulative_sum(ts);
        case TransformKind::LeadLag: return lead_lag(ts);
        case TransformKind::TimeAugment: return time_augment(ts);
        case TransformKind::BasepointAugment: return basepoint_augment(ts);
        case TransformKind::RangeNormalize:
            require(!t.range.empty(), "normalize step used before its range was fitted");
            return range_normalize(ts, t.range);
    }
    throw ValidationError("unknown transform");
}

}  // namespace

TransformPipeline TransformPipeline::parse(const std::vector<std::string>& tags) {
    std::vector<Transform> steps;
    for (const auto& tag : tags) {
        auto it = std::find_if(std::begin(kTags), std::end(kTags),
                               [&](const TagName& t) { return tag == t.name; });
        require(it != std::end(kTags), "unknown transform '" + tag +
                                           "' (expected cumsum, leadlag, time, basepoint, normalize)");
        steps.push_back(Transform::of(it->kind));
    }
    return TransformPipeline(std::move(steps));
}

std::vector<std::string> TransformPipeline::tags() const {
    std::vector<std::string> out;
    for (const auto& s : steps_)
        for (const auto& t : kTags)
            if (t.kind == s.kind) out.emplace_back(t.name);
    return out;
}

TimeSeries TransformPipeline::apply(const TimeSeries& ts) const {
    TimeSeries out = ts;
    for (const auto& s : steps_) out = apply_step(s, out);
    return out;
}

bool TransformPipeline::fitted() const {
    return std::none_of(steps_.begin(), steps_.end(), [](const Transform& t) {
        return t.kind == TransformKind::RangeNormalize && t.range.empty();
    });
}

TransformPipeline TransformPipeline::fit_ranges(std::span<const TimeSeries> samples) const {
    require(!samples.empty(), "fitting normalisation ranges needs at least one sample");
    std::vector<TimeSeries> current(samples.begin(), samples.end());
    std::vector<Transform> steps = steps_;
    for (auto& s : steps) {
        if (s.kind == TransformKind::RangeNormalize && s.range.empty()) {
            s.range = channel_ranges(current);
            for (double& r : s.range)
                if (!(r > 0.0)) r = 1.0;
        }
        for (auto& ts : current) ts = apply_step(s, ts);
    }
    return TransformPipeline(std::move(steps));
}

// --- CSV --------------------------------------------------------------------

std::string to_csv(const TimeSeries& ts) {
    std::string out = "t";
    for (std::size_t c = 0; c < ts.dim(); ++c) out += ",v" + std::to_string(c + 1);
    out += '\n';
    for (std::size_t i = 0; i < ts.size(); ++i) {
        out += format_exact(ts.time(i));
        for (std::size_t c = 0; c < ts.dim(); ++c) {
            out += ',';
            out += format_exact(ts.value(i, c));
        }
        out += '\n';
    }
    return out;
}

TimeSeries from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "time series CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t cols = 1 + static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    require(cols >= 2 && line.rfind("t,", 0) == 0, "time series CSV header must be t,v1,...,vd");
    const std::size_t d = cols - 1;
    std::vector<double> t, v;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t start = 0, field = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            std::string_view tok(line.data() + start,
                                 (comma == std::string::npos ? line.size() : comma) - start);
            require(field < cols, "too many fields on CSV line " + std::to_string(lineno));
            double x = parse_double(tok);
            (field == 0 ? t : v).push_back(x);
            ++field;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        require(field == cols, "wrong field count on CSV line " + std::to_string(lineno));
    }
    return TimeSeries(std::move(t), std::move(v), d);
}

void write_csv(const TimeSeries& ts, const std::string& path) { write_file(path, to_csv(ts)); }

TimeSeries read_csv(const std::string& path) { return from_csv(read_file(path)); }

}  // namespace sigabc
