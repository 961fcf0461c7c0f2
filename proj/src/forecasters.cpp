#include "evop/forecasters.hpp"

#include <set>
#include <sstream>
#include <stdexcept>

namespace evop {

namespace {

std::string format_prediction(const Prediction& p) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t k = 0; k < p.dimension(); ++k) os << (k ? "," : "") << p[k];
  return os.str();
}

class Constant final : public Forecaster {
 public:
  explicit Constant(Prediction p) : p_(p) {
    if (!p_.finite()) throw std::invalid_argument("constant forecaster needs a finite prediction");
  }
  std::optional<Prediction> predict(const LogView&) const override { return p_; }
  std::string describe() const override { return "constant(" + format_prediction(p_) + ")"; }
  bool total() const override { return true; }

 private:
  Prediction p_;
};

class EmpiricalFrequency final : public Forecaster {
 public:
  EmpiricalFrequency(double a, double b, Outcome symbol) : a_(a), b_(b), symbol_(symbol) {
    if (!(a > 0.0) || !(b > 0.0)) {
      throw std::invalid_argument("empirical_frequency pseudocounts must be positive");
    }
  }
  std::optional<Prediction> predict(const LogView& view) const override {
    const auto hits = static_cast<double>(view.revealed_count(symbol_));
    const auto total = static_cast<double>(view.revealed_count());
    return Prediction((hits + a_) / (total + a_ + b_));
  }
  std::string describe() const override {
    std::ostringstream os;
    os.precision(17);
    os << "empirical_frequency(" << symbol_.symbol << "; " << a_ << ", " << b_ << ")";
    return os.str();
  }
  bool total() const override { return true; }

 private:
  double a_;
  double b_;
  Outcome symbol_;
};

class Abstaining final : public Forecaster {
 public:
  Abstaining(ForecasterPtr base, std::function<bool(Index)> defined_on, std::string name)
      : base_(std::move(base)), defined_on_(std::move(defined_on)), name_(std::move(name)) {
    if (!base_) throw std::invalid_argument("abstaining forecaster needs a base");
  }
  std::optional<Prediction> predict(const LogView& view) const override {
    if (!defined_on_(view.size())) return std::nullopt;
    return base_->predict(view);
  }
  std::string describe() const override {
    return "abstaining(" + base_->describe() + " on " + name_ + ")";
  }

 private:
  ForecasterPtr base_;
  std::function<bool(Index)> defined_on_;
  std::string name_;
};

}  // namespace

ForecasterPtr constant(Prediction p) { return std::make_shared<Constant>(p); }

ForecasterPtr empirical_frequency(double a, double b, Outcome symbol) {
  return std::make_shared<EmpiricalFrequency>(a, b, symbol);
}

ForecasterPtr abstaining(ForecasterPtr base, std::function<bool(Index)> defined_on,
                         std::string predicate_name) {
  return std::make_shared<Abstaining>(std::move(base), std::move(defined_on),
                                      std::move(predicate_name));
}

ForecasterPool::ForecasterPool(std::vector<Member> members) : members_(std::move(members)) {
  if (members_.empty()) throw std::invalid_argument("forecaster pool is empty");
  std::set<std::string> names;
  bool any_total = false;
  for (const auto& m : members_) {
    if (!m.forecaster) throw std::invalid_argument("pool member '" + m.name + "' is null");
    if (m.name.empty()) throw std::invalid_argument("pool member names must be nonempty");
    if (!names.insert(m.name).second) {
      throw std::invalid_argument("duplicate pool member name '" + m.name + "'");
    }
    any_total = any_total || m.forecaster->total();
  }
  if (!any_total) {
    throw std::invalid_argument("forecaster pool needs at least one member defined everywhere");
  }
}

std::optional<std::size_t> ForecasterPool::find(const std::string& name) const {
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (members_[i].name == name) return i + 1;
  }
  return std::nullopt;
}

}  // namespace evop
