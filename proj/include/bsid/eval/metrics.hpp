#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bsid::eval {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
    std::size_t classes = 0;
    std::vector<std::uint64_t> counts;  // classes * classes, row-major

    explicit ConfusionMatrix(std::size_t n = 0) : classes(n), counts(n * n, 0) {}

    std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts[truth * classes + predicted]; }
    std::uint64_t& at(std::size_t truth, std::size_t predicted) { return counts[truth * classes + predicted]; }
    std::uint64_t total() const;

    bool operator==(const ConfusionMatrix&) const = default;
};

/// LengthMismatch for sequences of different length; ClassOutOfRange for an
/// id >= classes.
ConfusionMatrix confusion_matrix(std::span<const std::uint16_t> predictions, std::span<const std::uint16_t> truths,
                                 std::size_t classes);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;
};

/// Per-class precision/recall/F1 with 0 for a zero denominator; macro values
/// are plain means over every class, including classes with no support.
struct MetricsReport {
    std::vector<ClassMetrics> classes;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
};

MetricsReport macro_metrics(const ConfusionMatrix& cm);

/// key=value lines (macro_*, class_<id>_*) followed by the matrix, one row of
/// space-separated counts per true class. Reals use the shortest text that
/// round-trips, so identical reports produce identical files.
std::string format_metrics_file(const MetricsReport& report, const ConfusionMatrix& cm);

/// Aligned table for the terminal.
std::string format_report(const MetricsReport& report, const ConfusionMatrix& cm,
                          std::span<const std::string> class_names);

} // namespace bsid::eval
