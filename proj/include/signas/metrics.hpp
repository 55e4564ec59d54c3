#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace signas {

/// C x C grid of counts; rows are the true class, columns the predicted one.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t classes);
    ConfusionMatrix(std::size_t classes, std::vector<std::uint64_t> row_major);

    /// Tallies (true, predicted) label pairs.
    static ConfusionMatrix from_predictions(std::size_t classes, std::span<const int> truth,
                                            std::span<const int> predicted);

    std::size_t classes() const noexcept { return classes_; }
    std::uint64_t at(std::size_t truth, std::size_t predicted) const;
    std::uint64_t& at(std::size_t truth, std::size_t predicted);
    void add(std::size_t truth, std::size_t predicted, std::uint64_t n = 1) { at(truth, predicted) += n; }

    std::uint64_t total() const noexcept;
    std::uint64_t trace() const noexcept;

    // One-vs-rest reduction for class c.
    std::uint64_t true_positives(std::size_t c) const;
    std::uint64_t false_positives(std::size_t c) const;
    std::uint64_t false_negatives(std::size_t c) const;
    std::uint64_t true_negatives(std::size_t c) const;

private:
    std::size_t classes_;
    std::vector<std::uint64_t> counts_;
};

struct ClassMetrics {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    /// Set when a denominator was zero and the affected metric defaulted to 0.
    bool degenerate = false;

    bool operator==(const ClassMetrics&) const = default;
};

struct RocPoint {
    double threshold;
    double fpr;
    double tpr;

    bool operator==(const RocPoint&) const = default;
};

struct RocCurve {
    std::vector<RocPoint> points;  ///< starts at (0,0), ends at (1,1)
    double auc = 0.0;

    bool operator==(const RocCurve&) const = default;
};

struct ClassRoc {
    std::string label;
    RocCurve curve;

    bool operator==(const ClassRoc&) const = default;
};

struct QualityReport {
    double accuracy = 0.0;
    std::vector<ClassMetrics> per_class;
    std::vector<ClassRoc> roc;

    bool operator==(const QualityReport&) const = default;
};

/// (TP + TN) / total over the multi-class matrix, i.e. trace / total.
/// Empty matrix throws DomainError.
double accuracy(const ConfusionMatrix& cm);

/// Precision, recall and F1 of one class against the rest. Zero denominators
/// give 0 with `degenerate` set.
ClassMetrics precision_recall_f1(const ConfusionMatrix& cm, std::size_t cls);

/// Full report; labels default to "0", "1", ... when not supplied.
QualityReport make_report(const ConfusionMatrix& cm, std::span<const std::string> labels = {});

/// Threshold sweep over distinct scores, highest first. A sample is predicted
/// positive when its score >= threshold. Tied scores move in one step, so
/// the trapezoid area counts a tied positive/negative pair as one half.
/// Needs at least one positive and one negative label (DomainError otherwise).
RocCurve roc_curve(std::span<const double> scores, std::span<const bool> positive);

/// Metrics CSV: "accuracy,<value>" then "class,precision,recall,f1" rows.
void write_metrics_csv(std::ostream& out, const QualityReport& report);
/// ROC CSV: class,threshold,fpr,tpr
void write_roc_csv(std::ostream& out, std::span<const ClassRoc> curves);

/// Reads a square confusion matrix from CSV. An optional first row of class
/// labels is detected when it does not parse as integers.
struct LabeledMatrix {
    ConfusionMatrix matrix;
    std::vector<std::string> labels;
};
LabeledMatrix read_confusion_csv(std::istream& in);

}  // namespace signas
