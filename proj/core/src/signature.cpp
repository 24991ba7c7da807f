#include "clg/signature.hpp"

#include <algorithm>
#include <sstream>

#include "text.hpp"

namespace clg {

bool is_variable_name(std::string_view s) {
  return !s.empty() && (std::isupper(static_cast<unsigned char>(s[0])) || s[0] == '_');
}

Signature::Signature() { add_type("top"); }

TypeId Signature::add_type(const std::string& name) {
  if (auto it = type_index_.find(name); it != type_index_.end()) return it->second;
  TypeId id = static_cast<TypeId>(type_names_.size());
  type_names_.push_back(name);
  type_index_.emplace(name, id);
  parents_.emplace_back();
  return id;
}

void Signature::add_subtype(TypeId child, TypeId parent) {
  if (child == top()) throw SignatureError("top cannot have a parent");
  auto& ps = parents_.at(child);
  if (std::find(ps.begin(), ps.end(), parent) == ps.end()) ps.push_back(parent);
}

FeatId Signature::add_feature(const std::string& name) {
  if (auto it = feat_index_.find(name); it != feat_index_.end()) return it->second;
  FeatId id = static_cast<FeatId>(feat_names_.size());
  feat_names_.push_back(name);
  feat_index_.emplace(name, id);
  return id;
}

void Signature::set_approp(TypeId t, FeatId f, TypeId value) { approp_decl_.emplace_back(t, f, value); }

std::optional<TypeId> Signature::find_type(std::string_view name) const {
  auto it = type_index_.find(std::string(name));
  if (it == type_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<FeatId> Signature::find_feature(std::string_view name) const {
  auto it = feat_index_.find(std::string(name));
  if (it == feat_index_.end()) return std::nullopt;
  return it->second;
}

TypeId Signature::type(std::string_view name) const {
  auto t = find_type(name);
  if (!t) throw SignatureError("unknown type '" + std::string(name) + "'");
  return *t;
}

FeatId Signature::feature(std::string_view name) const {
  auto f = find_feature(name);
  if (!f) throw SignatureError("unknown feature '" + std::string(name) + "'");
  return *f;
}

TypeId Signature::meet(TypeId a, TypeId b) const {
  if (a == kInconsistent || b == kInconsistent) return kInconsistent;
  return meet_[a * n_ + b];
}

TypeId Signature::join(TypeId a, TypeId b) const {
  if (a == kInconsistent) return b;
  if (b == kInconsistent) return a;
  return join_[a * n_ + b];
}

TypeId Signature::approp(TypeId m, FeatId f) const {
  if (m < 0 || f < 0) return kInconsistent;
  return approp_[m * feature_count() + f];
}

void Signature::finalize() {
  n_ = type_count();
  const int n = n_;
  leq_.assign(static_cast<size_t>(n) * n, 0);
  for (int t = 0; t < n; ++t) {
    leq_[t * n + t] = 1;
    leq_[t * n + 0] = 1;
    for (TypeId p : parents_[t]) leq_[t * n + p] = 1;
  }
  // Warshall closure
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      if (leq_[i * n + k])
        for (int j = 0; j < n; ++j)
          if (leq_[k * n + j]) leq_[i * n + j] = 1;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (leq_[i * n + j] && leq_[j * n + i])
        throw SignatureError("cyclic subtype relation between '" + type_names_[i] + "' and '" +
                             type_names_[j] + "'");

  meet_.assign(static_cast<size_t>(n) * n, kInconsistent);
  join_.assign(static_cast<size_t>(n) * n, kInconsistent);
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      // greatest common lower bound
      TypeId best = kInconsistent;
      bool any = false;
      for (int c = 0; c < n; ++c) {
        if (!(leq(c, a) && leq(c, b))) continue;
        any = true;
        if (best == kInconsistent || leq(best, c)) best = c;
      }
      if (any) {
        for (int c = 0; c < n; ++c)
          if (leq(c, a) && leq(c, b) && !leq(c, best))
            throw SignatureError("types '" + type_names_[a] + "' and '" + type_names_[b] +
                                 "' have no unique meet");
      }
      meet_[a * n + b] = meet_[b * n + a] = best;
      TypeId up = kInconsistent;
      for (int c = 0; c < n; ++c) {
        if (!(leq(a, c) && leq(b, c))) continue;
        if (up == kInconsistent || leq(c, up)) up = c;
      }
      for (int c = 0; c < n; ++c)
        if (leq(a, c) && leq(b, c) && !leq(up, c))
          throw SignatureError("types '" + type_names_[a] + "' and '" + type_names_[b] +
                               "' have no unique join");
      join_[a * n + b] = join_[b * n + a] = up;
    }
  }

  minimal_.assign(n, 1);
  minimal_list_.clear();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (b != a && leq(b, a)) minimal_[a] = 0;
  for (int a = 0; a < n; ++a)
    if (minimal_[a]) minimal_list_.push_back(a);

  const int nf = feature_count();
  approp_.assign(static_cast<size_t>(n) * nf, kInconsistent);
  for (auto [t, f, v] : approp_decl_) {
    if (!minimal_[t])
      throw SignatureError("approp declared on non-minimal type '" + type_names_[t] + "'");
    approp_[t * nf + f] = v;
  }
  intro_.assign(nf, kInconsistent);
  bound_.assign(static_cast<size_t>(n) * nf, kInconsistent);
  for (int f = 0; f < nf; ++f) {
    for (TypeId m : minimal_list_)
      if (approp_[m * nf + f] != kInconsistent) intro_[f] = join(intro_[f], m);
    for (int t = 0; t < n; ++t) {
      TypeId acc = kInconsistent;
      for (TypeId m : minimal_list_)
        if (leq(m, t) && approp_[m * nf + f] != kInconsistent) acc = join(acc, approp_[m * nf + f]);
      bound_[t * nf + f] = acc;
    }
  }
}

Signature Signature::parse(std::string_view text) {
  Signature sig;
  struct Pending {
    int line;
    std::string t, f, v;
  };
  std::vector<Pending> approps;
  for (auto& [no, line] : text::content_lines(text)) {
    auto w = text::words(line);
    if (w[0] == "type") {
      auto lt = std::find(w.begin(), w.end(), "<");
      std::vector<std::string> names(w.begin() + 1, lt);
      if (names.empty()) throw SignatureError("type line declares no type", no);
      TypeId parent = sig.top();
      if (lt != w.end()) {
        if (lt + 2 != w.end()) throw SignatureError("expected exactly one parent after '<'", no);
        if (is_variable_name(*(lt + 1)) && *(lt + 1) != "top")
          throw SignatureError("type names must not start with an upper-case letter", no);
        parent = sig.add_type(*(lt + 1));
      }
      for (auto& nm : names) {
        if (is_variable_name(nm))
          throw SignatureError("type names must not start with an upper-case letter: '" + nm + "'", no);
        if (nm == "top") throw SignatureError("'top' is implicit", no);
        TypeId t = sig.add_type(nm);
        if (t == parent) throw SignatureError("type '" + nm + "' cannot be its own parent", no);
        sig.add_subtype(t, parent);
      }
    } else if (w[0] == "approp") {
      if (w.size() != 4) throw SignatureError("approp expects: approp minimalType feature valueType", no);
      approps.push_back({no, w[1], w[2], w[3]});
    } else {
      throw SignatureError("unknown declaration '" + w[0] + "'", no);
    }
  }
  for (auto& p : approps) {
    auto t = sig.find_type(p.t);
    auto v = sig.find_type(p.v);
    if (!t) throw SignatureError("unknown type '" + p.t + "'", p.line);
    if (!v) throw SignatureError("unknown type '" + p.v + "'", p.line);
    FeatId f = sig.add_feature(p.f);
    sig.set_approp(*t, f, *v);
  }
  try {
    sig.finalize();
  } catch (const SignatureError& e) {
    // attach the line of the offending approp declaration when possible
    for (auto& p : approps) {
      auto t = sig.find_type(p.t);
      if (t && std::string(e.what()).find("'" + p.t + "'") != std::string::npos &&
          std::string(e.what()).find("approp") != std::string::npos)
        throw SignatureError(e.what(), p.line);
    }
    throw;
  }
  return sig;
}

std::string Signature::render() const {
  std::ostringstream os;
  for (int t = 1; t < type_count(); ++t) {
    os << "type " << type_names_[t];
    for (TypeId p : parents_[t])
      if (p != top()) os << (p == parents_[t].front() ? " < " : "") << type_names_[p];
    os << "\n";
  }
  for (auto [t, f, v] : approp_decl_)
    os << "approp " << type_names_[t] << " " << feat_names_[f] << " " << type_names_[v] << "\n";
  return os.str();
}

}  // namespace clg
