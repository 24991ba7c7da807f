#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace clg {

using TypeId = int;
using FeatId = int;
inline constexpr TypeId kInconsistent = -1;

struct SignatureError : std::runtime_error {
  int line = 0;
  SignatureError(const std::string& msg, int line_no = 0)
      : std::runtime_error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + msg : msg),
        line(line_no) {}
};

// Finite type hierarchy with an implicit most general type "top".
// a <= b means a is at least as specific as b.
class Signature {
 public:
  Signature();

  static Signature parse(std::string_view text);

  TypeId add_type(const std::string& name);
  void add_subtype(TypeId child, TypeId parent);
  FeatId add_feature(const std::string& name);
  void set_approp(TypeId t, FeatId f, TypeId value);
  // Computes order, meets, joins and validates. Must be called after edits.
  void finalize();

  TypeId top() const { return 0; }
  int type_count() const { return static_cast<int>(type_names_.size()); }
  int feature_count() const { return static_cast<int>(feat_names_.size()); }
  std::optional<TypeId> find_type(std::string_view name) const;
  std::optional<FeatId> find_feature(std::string_view name) const;
  TypeId type(std::string_view name) const;
  FeatId feature(std::string_view name) const;
  const std::string& type_name(TypeId t) const { return type_names_.at(t); }
  const std::string& feature_name(FeatId f) const { return feat_names_.at(f); }

  bool leq(TypeId a, TypeId b) const { return leq_[a * n_ + b] != 0; }
  TypeId meet(TypeId a, TypeId b) const;
  TypeId join(TypeId a, TypeId b) const;
  bool minimal(TypeId t) const { return minimal_.at(t) != 0; }
  const std::vector<TypeId>& minimal_types() const { return minimal_list_; }
  const std::vector<TypeId>& parents(TypeId t) const { return parents_.at(t); }

  // approp(m, f) for minimal m, kInconsistent when undefined.
  TypeId approp(TypeId m, FeatId f) const;
  // Join of the minimal types carrying f, kInconsistent if f is carried by none.
  TypeId intro(FeatId f) const { return intro_.at(f); }
  // Join of approp(m, f) over minimal m <= t that carry f.
  TypeId value_bound(TypeId t, FeatId f) const { return bound_[t * feature_count() + f]; }

  std::string render() const;

 private:
  std::vector<std::string> type_names_;
  std::unordered_map<std::string, TypeId> type_index_;
  std::vector<std::vector<TypeId>> parents_;
  std::vector<std::string> feat_names_;
  std::unordered_map<std::string, FeatId> feat_index_;
  std::vector<std::tuple<TypeId, FeatId, TypeId>> approp_decl_;

  int n_ = 0;
  std::vector<uint8_t> leq_;
  std::vector<TypeId> meet_;
  std::vector<TypeId> join_;
  std::vector<uint8_t> minimal_;
  std::vector<TypeId> minimal_list_;
  std::vector<TypeId> approp_;
  std::vector<TypeId> intro_;
  std::vector<TypeId> bound_;
};

bool is_variable_name(std::string_view s);

}  // namespace clg
