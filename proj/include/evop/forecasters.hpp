#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evop/core_model.hpp"

namespace evop {

/// A partial map from observation prefixes to predictions. predict() must be
/// a pure function of the view.
class Forecaster {
 public:
  virtual ~Forecaster() = default;

  /// Prediction of x_n from o_1..o_n, n = view.size(); nothing if abstaining.
  virtual std::optional<Prediction> predict(const LogView& view) const = 0;
  virtual std::string describe() const = 0;
  /// Declares that predict() never abstains.
  virtual bool total() const { return false; }
};

using ForecasterPtr = std::shared_ptr<const Forecaster>;

ForecasterPtr constant(Prediction p);

/// (revealed count of `symbol` + a) / (revealed count + a + b).
ForecasterPtr empirical_frequency(double a = 1.0, double b = 1.0, Outcome symbol = kHeads);

/// Delegates to `base` at steps accepted by `defined_on`; abstains elsewhere.
ForecasterPtr abstaining(ForecasterPtr base, std::function<bool(Index)> defined_on,
                         std::string predicate_name);

class ForecasterPool {
 public:
  struct Member {
    std::string name;
    ForecasterPtr forecaster;
  };

  /// Names must be unique and at least one member must be total.
  explicit ForecasterPool(std::vector<Member> members);

  /// Members are numbered 1..size().
  std::size_t size() const { return members_.size(); }
  const Forecaster& operator[](std::size_t i) const { return *members_.at(i - 1).forecaster; }
  const std::string& name(std::size_t i) const { return members_.at(i - 1).name; }
  /// 1-based index of the member called `name`, if any.
  std::optional<std::size_t> find(const std::string& name) const;
  const std::vector<Member>& members() const { return members_; }

 private:
  std::vector<Member> members_;
};

}  // namespace evop
