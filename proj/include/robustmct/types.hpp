#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "robustmct/errors.hpp"

namespace robustmct {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Tail { TwoSided, Greater, Less };

std::string to_string(Tail tail);

/// One group of a one-way layout.
struct Group {
    std::string label;
    VectorXd responses;
    std::optional<double> dose;
};

/// One-way layout: group 0 is the control, groups 1..k are treatments.
class GroupedSample {
public:
    explicit GroupedSample(std::vector<Group> groups);

    int k() const { return static_cast<int>(groups_.size()) - 1; }
    int num_groups() const { return static_cast<int>(groups_.size()); }
    int n(int i) const { return static_cast<int>(groups_[i].responses.size()); }
    int total_n() const;
    const Group& group(int i) const { return groups_[i]; }
    const std::vector<Group>& groups() const { return groups_; }

    double mean(int i) const { return groups_[i].responses.mean(); }
    /// Unbiased sample variance of group i.
    double variance(int i) const;
    VectorXd means() const;
    VectorXd variances() const;
    std::vector<int> sizes() const;

    /// All responses stacked, control first; group_index()[j] gives the group of entry j.
    VectorXd stacked() const;
    std::vector<int> group_index() const;

private:
    std::vector<Group> groups_;
};

/// q x (k+1) matrix of contrast coefficients; rows sum to zero.
class ContrastMatrix {
public:
    ContrastMatrix(MatrixXd coefficients, std::vector<std::string> labels = {});

    int rows() const { return static_cast<int>(coef_.rows()); }
    int cols() const { return static_cast<int>(coef_.cols()); }
    const MatrixXd& coefficients() const { return coef_; }
    const std::vector<std::string>& labels() const { return labels_; }

private:
    MatrixXd coef_;
    std::vector<std::string> labels_;
};

/// Dunnett many-to-one contrasts: row i compares treatment i with the control.
ContrastMatrix dunnett_contrasts(int k);
ContrastMatrix dunnett_contrasts(const GroupedSample& sample);

/// Result of a max-t multiple contrast test.
struct MaxTResult {
    std::vector<std::string> labels;
    VectorXd estimates;
    VectorXd std_errors;
    VectorXd t_stats;
    VectorXd p_adjusted;
    VectorXd lower;
    VectorXd upper;
    VectorXd df_per_contrast;  // empty unless the backend provides them
    double df = 0.0;           // df used for the joint distribution; inf = normal
    double critical_value = 0.0;
    double alpha = 0.05;
    Tail tail = Tail::TwoSided;
    MatrixXd correlation;
    std::vector<bool> boundary_flag;  // nparm continuity correction markers
};

} // namespace robustmct
