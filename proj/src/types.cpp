#include "robustmct/types.hpp"

#include <cmath>

namespace robustmct {

std::string to_string(Tail tail) {
    switch (tail) {
        case Tail::TwoSided: return "two-sided";
        case Tail::Greater: return "greater";
        case Tail::Less: return "less";
    }
    return "?";
}

GroupedSample::GroupedSample(std::vector<Group> groups) : groups_(std::move(groups)) {
    if (groups_.size() < 2)
        throw invalid_design_error("need a control group and at least one treatment group");
    for (const auto& g : groups_) {
        if (g.responses.size() < 2)
            throw invalid_design_error("group '" + g.label + "' has fewer than 2 observations");
        for (int j = 0; j < g.responses.size(); ++j)
            if (!std::isfinite(g.responses(j)))
                throw invalid_design_error("non-finite response in group '" + g.label + "'");
    }
}

int GroupedSample::total_n() const {
    int n = 0;
    for (const auto& g : groups_) n += static_cast<int>(g.responses.size());
    return n;
}

double GroupedSample::variance(int i) const {
    const VectorXd& y = groups_[i].responses;
    const double m = y.mean();
    return (y.array() - m).square().sum() / (y.size() - 1);
}

VectorXd GroupedSample::means() const {
    VectorXd m(num_groups());
    for (int i = 0; i < num_groups(); ++i) m(i) = mean(i);
    return m;
}

VectorXd GroupedSample::variances() const {
    VectorXd v(num_groups());
    for (int i = 0; i < num_groups(); ++i) v(i) = variance(i);
    return v;
}

std::vector<int> GroupedSample::sizes() const {
    std::vector<int> ns;
    ns.reserve(groups_.size());
    for (const auto& g : groups_) ns.push_back(static_cast<int>(g.responses.size()));
    return ns;
}

VectorXd GroupedSample::stacked() const {
    VectorXd y(total_n());
    int pos = 0;
    for (const auto& g : groups_) {
        y.segment(pos, g.responses.size()) = g.responses;
        pos += static_cast<int>(g.responses.size());
    }
    return y;
}

std::vector<int> GroupedSample::group_index() const {
    std::vector<int> idx;
    idx.reserve(total_n());
    for (int i = 0; i < num_groups(); ++i)
        for (int j = 0; j < n(i); ++j) idx.push_back(i);
    return idx;
}

ContrastMatrix::ContrastMatrix(MatrixXd coefficients, std::vector<std::string> labels)
    : coef_(std::move(coefficients)), labels_(std::move(labels)) {
    if (coef_.rows() < 1) throw invalid_design_error("contrast matrix has no rows");
    for (int i = 0; i < coef_.rows(); ++i) {
        if (std::abs(coef_.row(i).sum()) > 1e-10)
            throw invalid_design_error("contrast row does not sum to zero");
        if (coef_.row(i).cwiseAbs().maxCoeff() == 0.0)
            throw invalid_design_error("contrast row is all zero");
    }
    if (labels_.empty())
        for (int i = 0; i < coef_.rows(); ++i) labels_.push_back("C" + std::to_string(i + 1));
    if (static_cast<int>(labels_.size()) != coef_.rows())
        throw invalid_design_error("contrast labels do not match the row count");
}

ContrastMatrix dunnett_contrasts(int k) {
    if (k < 1) throw invalid_design_error("Dunnett contrasts need k >= 1 treatments");
    MatrixXd c = MatrixXd::Zero(k, k + 1);
    std::vector<std::string> labels;
    for (int i = 0; i < k; ++i) {
        c(i, 0) = -1.0;
        c(i, i + 1) = 1.0;
        labels.push_back("g" + std::to_string(i + 1) + " - g0");
    }
    return ContrastMatrix(std::move(c), std::move(labels));
}

ContrastMatrix dunnett_contrasts(const GroupedSample& sample) {
    const int k = sample.k();
    MatrixXd c = MatrixXd::Zero(k, k + 1);
    std::vector<std::string> labels;
    for (int i = 0; i < k; ++i) {
        c(i, 0) = -1.0;
        c(i, i + 1) = 1.0;
        labels.push_back(sample.group(i + 1).label + " - " + sample.group(0).label);
    }
    return ContrastMatrix(std::move(c), std::move(labels));
}

} // namespace robustmct
