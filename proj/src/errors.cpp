#include "hmmar/errors.hpp"

#include <sstream>
#include <utility>

namespace hmmar {

namespace {

std::string join_reasons(const std::vector<std::string>& reasons) {
    std::ostringstream os;
    os << "all " << reasons.size() << " restarts failed";
    for (std::size_t i = 0; i < reasons.size(); ++i) {
        os << "\n  restart " << i << ": " << reasons[i];
    }
    return os.str();
}

}  // namespace

UnsupportedOrder::UnsupportedOrder(std::size_t order_)
    : Error("stability analysis requires p = 1, got p = " + std::to_string(order_)),
      order(order_) {}

NumericalUnderflow::NumericalUnderflow(long t_, const std::string& detail)
    : Error("numerical underflow at t = " + std::to_string(t_) + ": " + detail), t(t_) {}

ConditionViolated::ConditionViolated(std::string condition_, double value_)
    : Error([&] {
          std::ostringstream os;
          os << "condition violated: " << condition_ << " (value " << value_ << ")";
          return os.str();
      }()),
      condition(std::move(condition_)),
      value(value_) {}

DegenerateRegime::DegenerateRegime(std::size_t regime_, const std::string& detail)
    : Error("degenerate regime " + std::to_string(regime_) + ": " + detail), regime(regime_) {}

AllRestartsFailed::AllRestartsFailed(std::vector<std::string> reasons_)
    : Error(join_reasons(reasons_)), reasons(std::move(reasons_)) {}

}  // namespace hmmar
