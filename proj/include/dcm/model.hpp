#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dcm/dataset.hpp"
#include "dcm/dual.hpp"
#include "dcm/spec.hpp"

namespace dcm {

/// Free-parameter values with their names, in BoundModel layout order.
struct ParameterVector {
    std::vector<std::string> names;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    bool operator==(const ParameterVector&) const = default;
};

/// Utility expression flattened to postfix form.
class Program {
public:
    enum class Code { constant, var, param, add, sub, mul, div, neg, log, exp, sqrt, pow, boxcox, piecewise };
    struct Instr {
        Code code;
        double value = 0;  // constant, pow exponent
        int index = -1;    // variable index, parameter slot, shape slot, piecewise table
    };
    struct Piecewise {
        int variable;
        std::vector<double> knots;
        std::vector<int> slots;
    };

    std::vector<Instr> code;
    std::vector<Piecewise> piecewise;
    std::size_t max_depth = 0;

    double eval(std::span<const double> row, std::span<const double> params, std::vector<double>& stack) const;

    /// Forward-mode evaluation; param_dir[slot] is the derivative direction
    /// seeded for that parameter, or -1 when it is held constant.
    void eval_dual(std::span<const double> row, std::span<const double> params, std::span<const int> param_dir,
                   std::size_t n_dirs, std::vector<Dual>& stack) const;
};

/// A specification compiled against a dataset.
///
/// Parameter slots follow declaration order over the parameters some utility
/// uses; the free ones form the estimation vector in the same order. The
/// dataset must outlive the model.
class BoundModel {
public:
    const Dataset& data() const { return *data_; }
    const UtilitySpec& spec() const { return spec_; }

    std::size_t n_free() const { return free_slots_.size(); }
    const std::vector<std::string>& free_names() const { return free_names_; }
    ParameterVector start_values() const;

    /// Values for every slot: free values from theta, fixed values from the spec.
    void expand(std::span<const double> theta, std::vector<double>& slots) const;

    /// Program for dataset alternative j; nullptr means V_j = 0.
    const Program* program(std::size_t alt) const { return programs_[alt].code.empty() ? nullptr : &programs_[alt]; }
    std::span<const int> slot_directions() const { return slot_dir_; }
    std::size_t n_slots() const { return slot_names_.size(); }

private:
    friend BoundModel bind(const UtilitySpec& spec, const Dataset& data);

    UtilitySpec spec_;
    const Dataset* data_ = nullptr;
    std::vector<std::string> slot_names_;
    std::vector<double> slot_fixed_;  // value for fixed slots
    std::vector<int> slot_dir_;       // free index or -1
    std::vector<std::size_t> free_slots_;
    std::vector<std::string> free_names_;
    std::vector<double> free_start_;
    std::vector<Program> programs_;  // one per dataset alternative
};

/// Compiles a spec against a dataset. Throws SpecError with unknown_variable,
/// domain_violation or missing_alternative.
BoundModel bind(const UtilitySpec& spec, const Dataset& data);

/// Compiles an expression with the given variable and parameter resolvers.
Program compile(const Expr& e, const std::function<int(const std::string&)>& var_index,
                const std::function<int(const std::string&)>& param_slot);

}  // namespace dcm
