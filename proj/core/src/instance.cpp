#include "replsim/instance.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace replsim {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

double ReleaseDist::survival(int elapsed) const {
  if (elapsed < 0) return 1.0;
  switch (kind) {
    case ReleaseKind::Never:
      return 1.0;
    case ReleaseKind::AfterSteps:
      return elapsed < steps ? 1.0 : 0.0;
    case ReleaseKind::Geometric:
      return std::pow(1.0 - p, elapsed);
  }
  return 1.0;
}

const ConsumptionProfile* Action::profile_for(int resource) const {
  for (const auto& u : uses)
    if (u.resource == resource) return &u.profile;
  return nullptr;
}

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("instance: " + msg);
}

void check_keys(const json& o, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
  for (auto it = o.begin(); it != o.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) { known = true; break; }
    if (!known) fail("unknown field '" + it.key() + "' in " + ctx);
  }
}

const json& need(const json& o, const char* key, const std::string& ctx) {
  auto it = o.find(key);
  if (it == o.end()) fail("missing field '" + std::string(key) + "' in " + ctx);
  return *it;
}

double need_num(const json& o, const char* key, const std::string& ctx) {
  const json& v = need(o, key, ctx);
  if (!v.is_number()) fail("field '" + std::string(key) + "' in " + ctx + " must be a number");
  return v.get<double>();
}

int need_int(const json& o, const char* key, const std::string& ctx) {
  const json& v = need(o, key, ctx);
  if (!v.is_number_integer()) fail("field '" + std::string(key) + "' in " + ctx + " must be an integer");
  return v.get<int>();
}

std::string need_str(const json& o, const char* key, const std::string& ctx) {
  const json& v = need(o, key, ctx);
  if (!v.is_string()) fail("field '" + std::string(key) + "' in " + ctx + " must be a string");
  return v.get<std::string>();
}

ReleaseDist parse_release(const json& o, const std::string& ctx) {
  if (!o.is_object()) fail("release in " + ctx + " must be an object");
  std::string kind = need_str(o, "kind", ctx + " release");
  ReleaseDist r;
  if (kind == "inf") {
    check_keys(o, {"kind"}, ctx + " release");
    r.kind = ReleaseKind::Never;
  } else if (kind == "det") {
    check_keys(o, {"kind", "steps"}, ctx + " release");
    r.kind = ReleaseKind::AfterSteps;
    r.steps = need_int(o, "steps", ctx + " release");
    if (r.steps < 1) fail("release steps must be >= 1 in " + ctx);
  } else if (kind == "geom") {
    check_keys(o, {"kind", "p"}, ctx + " release");
    r.kind = ReleaseKind::Geometric;
    r.p = need_num(o, "p", ctx + " release");
    if (!(r.p > 0.0 && r.p <= 1.0)) fail("release p must lie in (0, 1] in " + ctx);
  } else {
    fail("unknown release kind '" + kind + "' in " + ctx);
  }
  return r;
}

ojson release_json(const ReleaseDist& r) {
  ojson o;
  switch (r.kind) {
    case ReleaseKind::Never:
      o["kind"] = "inf";
      break;
    case ReleaseKind::AfterSteps:
      o["kind"] = "det";
      o["steps"] = r.steps;
      break;
    case ReleaseKind::Geometric:
      o["kind"] = "geom";
      o["p"] = r.p;
      break;
  }
  return o;
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

// JSON input and output live in one translation unit so the accepted and the
// emitted schema cannot drift apart.
class InstanceJson {
 public:
  static Instance load(const std::string& text) {
    json root;
    try {
      root = json::parse(text);
    } catch (const json::exception& e) {
      fail(std::string("JSON parse error: ") + e.what());
    }
    if (!root.is_object()) fail("top level must be an object");
    check_keys(root, {"resources", "arrivals", "actions", "replenishment"}, "top level");

    Instance inst;
    parse_resources(need(root, "resources", "top level"), inst);
    parse_arrivals(need(root, "arrivals", "top level"), inst);
    parse_actions(need(root, "actions", "top level"), inst);
    parse_replenishment(need(root, "replenishment", "top level"), inst);
    inst.validate();
    return inst;
  }

  static std::string serialize(const Instance& inst) {
    ojson root;
    ojson res = ojson::array();
    for (const auto& r : inst.resources) {
      ojson o;
      o["id"] = r.id;
      o["initial_inventory"] = r.initial_inventory;
      if (!r.origin.original()) {
        ojson org;
        org["parent"] = inst.resources[r.origin.parent].id;
        org["created_at"] = r.origin.created_at;
        o["origin"] = org;
      }
      res.push_back(o);
    }
    root["resources"] = res;

    ojson arr;
    arr["mode"] = inst.arrivals.mode == ArrivalMode::Adversarial ? "adversarial" : "stochastic";
    arr["horizon"] = inst.arrivals.horizon;
    arr["types"] = inst.arrivals.types;
    if (inst.arrivals.mode == ArrivalMode::Stochastic)
      arr["type_probs"] = inst.arrivals.type_probs;
    root["arrivals"] = arr;

    ojson acts = ojson::array();
    for (const auto& a : inst.actions) {
      ojson o;
      o["id"] = a.id;
      ojson uses = ojson::object();
      for (const auto& u : a.uses) {
        ojson p;
        p["peak"] = u.profile.peak;
        p["success_prob"] = u.profile.success_prob;
        p["release"] = release_json(u.profile.release);
        uses[inst.resources[u.resource].id] = p;
      }
      o["uses"] = std::move(uses);
      ojson rew = ojson::object();
      for (const auto& e : a.rewards) {
        ojson v;
        v["kind"] = e.kind == RewardKind::Deterministic ? "deterministic" : "coupled";
        v["value"] = e.value;
        rew[inst.resources[e.resource].id + "/" + inst.arrivals.type_ids[e.type]] = v;
      }
      o["rewards"] = std::move(rew);
      if (a.activation != 1) o["activation"] = a.activation;
      if (!a.origin.original()) {
        ojson org;
        org["root"] = inst.actions[a.origin.root_action].id;
        org["substituted"] = inst.resources[a.origin.substituted_resource].id;
        o["origin"] = org;
      }
      acts.push_back(o);
    }
    root["actions"] = acts;

    ojson rep;
    rep["mode"] = inst.replenishment.mode == ReplenishmentMode::Adversarial ? "adversarial" : "stochastic";
    rep["bound_M"] = inst.replenishment.bound_M;
    if (inst.replenishment.mode == ReplenishmentMode::Adversarial) {
      ojson rows = ojson::array();
      for (const auto& e : inst.replenishment.fixed) {
        ojson o;
        o["i"] = inst.resources[e.resource].id;
        o["j"] = e.request;
        o["amount"] = e.amount;
        rows.push_back(o);
      }
      rep["fixed"] = rows;
    } else {
      ojson rows = ojson::array();
      for (const auto& e : inst.replenishment.entries) {
        ojson o;
        o["i"] = inst.resources[e.resource].id;
        o["j"] = e.request;
        o["w"] = e.support;
        o["q"] = e.mean;
        rows.push_back(o);
      }
      rep["entries"] = rows;
    }
    root["replenishment"] = rep;
    return root.dump(2) + "\n";
  }

 private:
  static void parse_resources(const json& arr, Instance& inst) {
    if (!arr.is_array()) fail("resources must be an array");
    struct PendingOrigin { std::string parent; int created_at; };
    std::vector<PendingOrigin> origins(arr.size(), {"", 0});
    int idx = 0;
    for (const auto& o : arr) {
      std::string ctx = "resources[" + std::to_string(idx) + "]";
      if (!o.is_object()) fail(ctx + " must be an object");
      check_keys(o, {"id", "initial_inventory", "origin"}, ctx);
      Resource r;
      r.id = need_str(o, "id", ctx);
      r.initial_inventory = need_num(o, "initial_inventory", ctx);
      if (auto it = o.find("origin"); it != o.end()) {
        check_keys(*it, {"parent", "created_at"}, ctx + " origin");
        origins[idx] = {need_str(*it, "parent", ctx + " origin"),
                        need_int(*it, "created_at", ctx + " origin")};
      }
      inst.resources.push_back(std::move(r));
      ++idx;
    }
    // Resolve origin parents now that all ids are known.
    for (size_t i = 0; i < inst.resources.size(); ++i) {
      if (origins[i].parent.empty()) continue;
      int p = -1;
      for (size_t k = 0; k < inst.resources.size(); ++k)
        if (inst.resources[k].id == origins[i].parent) { p = static_cast<int>(k); break; }
      if (p < 0) fail("origin parent '" + origins[i].parent + "' of resource '" +
                      inst.resources[i].id + "' does not exist");
      inst.resources[i].origin.parent = p;
      inst.resources[i].origin.created_at = origins[i].created_at;
    }
  }

  static void parse_arrivals(const json& o, Instance& inst) {
    if (!o.is_object()) fail("arrivals must be an object");
    check_keys(o, {"mode", "horizon", "types", "type_probs"}, "arrivals");
    std::string mode = need_str(o, "mode", "arrivals");
    if (mode == "adversarial")
      inst.arrivals.mode = ArrivalMode::Adversarial;
    else if (mode == "stochastic")
      inst.arrivals.mode = ArrivalMode::Stochastic;
    else
      fail("unknown arrival mode '" + mode + "'");
    inst.arrivals.horizon = need_int(o, "horizon", "arrivals");
    const json& types = need(o, "types", "arrivals");
    if (!types.is_array()) fail("arrivals types must be an array");
    for (const auto& t : types) {
      if (!t.is_string()) fail("arrivals types must be strings");
      inst.arrivals.types.push_back(t.get<std::string>());
    }
    if (inst.arrivals.mode == ArrivalMode::Stochastic) {
      const json& probs = need(o, "type_probs", "arrivals");
      if (!probs.is_array()) fail("type_probs must be an array");
      for (const auto& row : probs) {
        if (!row.is_array()) fail("type_probs rows must be arrays");
        std::vector<double> r;
        for (const auto& v : row) {
          if (!v.is_number()) fail("type_probs entries must be numbers");
          r.push_back(v.get<double>());
        }
        inst.arrivals.type_probs.push_back(std::move(r));
      }
    } else if (o.find("type_probs") != o.end()) {
      fail("type_probs is not allowed in adversarial mode");
    }
  }

  struct PendingActionOrigin { int action; std::string root; std::string substituted; };

  static void parse_actions(const json& arr, Instance& inst) {
    if (!arr.is_array()) fail("actions must be an array");
    std::vector<std::string> reward_types;        // one per reward, push order
    std::vector<PendingActionOrigin> origins;
    int idx = 0;
    for (const auto& o : arr) {
      std::string ctx = "actions[" + std::to_string(idx) + "]";
      if (!o.is_object()) fail(ctx + " must be an object");
      check_keys(o, {"id", "uses", "rewards", "activation", "origin"}, ctx);
      Action a;
      a.id = need_str(o, "id", ctx);
      const json& uses = need(o, "uses", ctx);
      if (!uses.is_object()) fail(ctx + " uses must be an object");
      for (auto it = uses.begin(); it != uses.end(); ++it) {
        int res = -1;
        for (size_t k = 0; k < inst.resources.size(); ++k)
          if (inst.resources[k].id == it.key()) { res = static_cast<int>(k); break; }
        if (res < 0) fail("action '" + a.id + "' uses unknown resource '" + it.key() + "'");
        const json& p = *it;
        if (!p.is_object()) fail(ctx + " use of '" + it.key() + "' must be an object");
        check_keys(p, {"peak", "success_prob", "release"}, ctx + " use of '" + it.key() + "'");
        ResourceUse u;
        u.resource = res;
        u.profile.peak = need_num(p, "peak", ctx);
        u.profile.success_prob = need_num(p, "success_prob", ctx);
        u.profile.release = parse_release(need(p, "release", ctx), ctx);
        a.uses.push_back(u);
      }
      const json& rewards = need(o, "rewards", ctx);
      if (!rewards.is_object()) fail(ctx + " rewards must be an object");
      for (auto it = rewards.begin(); it != rewards.end(); ++it) {
        const std::string& key = it.key();
        auto slash = key.find('/');
        if (slash == std::string::npos)
          fail("reward key '" + key + "' of action '" + a.id + "' must be 'resource/type'");
        std::string rid = key.substr(0, slash);
        std::string zid = key.substr(slash + 1);
        int res = -1;
        for (size_t k = 0; k < inst.resources.size(); ++k)
          if (inst.resources[k].id == rid) { res = static_cast<int>(k); break; }
        if (res < 0) fail("reward of action '" + a.id + "' references unknown resource '" + rid + "'");
        const json& v = *it;
        if (!v.is_object()) fail("reward '" + key + "' of action '" + a.id + "' must be an object");
        check_keys(v, {"kind", "value"}, "reward '" + key + "' of action '" + a.id + "'");
        std::string kind = need_str(v, "kind", "reward '" + key + "'");
        RewardEntry e;
        e.resource = res;
        e.type = -1;  // resolved in validate(), after type ids are known
        // Temporarily stash the type id in a side list, index-aligned.
        if (kind == "deterministic")
          e.kind = RewardKind::Deterministic;
        else if (kind == "coupled")
          e.kind = RewardKind::CoupledToConsumption;
        else
          fail("unknown reward kind '" + kind + "' in action '" + a.id + "'");
        e.value = need_num(v, "value", "reward '" + key + "'");
        a.rewards.push_back(e);
        reward_types.push_back(zid);
      }
      if (auto it = o.find("activation"); it != o.end()) {
        if (!it->is_number_integer()) fail(ctx + " activation must be an integer");
        a.activation = it->get<int>();
      }
      if (auto it = o.find("origin"); it != o.end()) {
        check_keys(*it, {"root", "substituted"}, ctx + " origin");
        origins.push_back({idx, need_str(*it, "root", ctx + " origin"),
                           need_str(*it, "substituted", ctx + " origin")});
      }
      inst.actions.push_back(std::move(a));
      ++idx;
    }

    // Reward type ids resolve against the distinct-type universe, which
    // validate() will rebuild identically.
    std::vector<std::string> ids;
    for (const auto& t : inst.arrivals.types)
      if (std::find(ids.begin(), ids.end(), t) == ids.end()) ids.push_back(t);
    size_t cursor = 0;
    for (auto& a : inst.actions) {
      for (auto& e : a.rewards) {
        const std::string& zid = reward_types[cursor++];
        auto it = std::find(ids.begin(), ids.end(), zid);
        if (it == ids.end())
          fail("reward of action '" + a.id + "' references unknown type '" + zid + "'");
        e.type = static_cast<int>(it - ids.begin());
      }
    }
    for (const auto& po : origins) {
      Action& a = inst.actions[po.action];
      int root = -1, sub = -1;
      for (size_t k = 0; k < inst.actions.size(); ++k)
        if (inst.actions[k].id == po.root) { root = static_cast<int>(k); break; }
      for (size_t k = 0; k < inst.resources.size(); ++k)
        if (inst.resources[k].id == po.substituted) { sub = static_cast<int>(k); break; }
      if (root < 0) fail("origin root '" + po.root + "' of action '" + a.id + "' does not exist");
      if (sub < 0)
        fail("origin substituted resource '" + po.substituted + "' of action '" + a.id +
             "' does not exist");
      a.origin.root_action = root;
      a.origin.substituted_resource = sub;
    }
  }

  static void parse_replenishment(const json& o, Instance& inst) {
    if (!o.is_object()) fail("replenishment must be an object");
    check_keys(o, {"mode", "bound_M", "entries", "fixed"}, "replenishment");
    std::string mode = need_str(o, "mode", "replenishment");
    inst.replenishment.bound_M = need_num(o, "bound_M", "replenishment");
    if (mode == "adversarial") {
      inst.replenishment.mode = ReplenishmentMode::Adversarial;
      if (o.find("entries") != o.end()) fail("adversarial replenishment takes 'fixed', not 'entries'");
      const json& rows = need(o, "fixed", "replenishment");
      if (!rows.is_array()) fail("replenishment fixed must be an array");
      for (const auto& e : rows) {
        check_keys(e, {"i", "j", "amount"}, "replenishment fixed entry");
        FixedReplenishment f;
        std::string rid = need_str(e, "i", "replenishment fixed entry");
        int res = -1;
        for (size_t k = 0; k < inst.resources.size(); ++k)
          if (inst.resources[k].id == rid) { res = static_cast<int>(k); break; }
        if (res < 0) fail("replenishment references unknown resource '" + rid + "'");
        f.resource = res;
        f.request = need_int(e, "j", "replenishment fixed entry");
        f.amount = need_num(e, "amount", "replenishment fixed entry");
        inst.replenishment.fixed.push_back(f);
      }
    } else if (mode == "stochastic") {
      inst.replenishment.mode = ReplenishmentMode::Stochastic;
      if (o.find("fixed") != o.end()) fail("stochastic replenishment takes 'entries', not 'fixed'");
      const json& rows = need(o, "entries", "replenishment");
      if (!rows.is_array()) fail("replenishment entries must be an array");
      for (const auto& e : rows) {
        check_keys(e, {"i", "j", "w", "q"}, "replenishment entry");
        StochasticReplenishment s;
        std::string rid = need_str(e, "i", "replenishment entry");
        int res = -1;
        for (size_t k = 0; k < inst.resources.size(); ++k)
          if (inst.resources[k].id == rid) { res = static_cast<int>(k); break; }
        if (res < 0) fail("replenishment references unknown resource '" + rid + "'");
        s.resource = res;
        s.request = need_int(e, "j", "replenishment entry");
        s.support = need_num(e, "w", "replenishment entry");
        s.mean = need_num(e, "q", "replenishment entry");
        inst.replenishment.entries.push_back(s);
      }
    } else {
      fail("unknown replenishment mode '" + mode + "'");
    }
  }
};

Instance Instance::load(const std::string& json_text) {
  return InstanceJson::load(json_text);
}

std::string Instance::serialize() const {
  return InstanceJson::serialize(*this);
}

void Instance::rebuild_indexes() {
  res_index_.clear();
  act_index_.clear();
  type_index_.clear();
  for (size_t i = 0; i < resources.size(); ++i)
    res_index_[resources[i].id] = static_cast<int>(i);
  for (size_t i = 0; i < actions.size(); ++i)
    act_index_[actions[i].id] = static_cast<int>(i);
  for (size_t i = 0; i < arrivals.type_ids.size(); ++i)
    type_index_[arrivals.type_ids[i]] = static_cast<int>(i);

  const int m = arrivals.horizon;
  fixed_dense_.assign(resources.size(), std::vector<double>(m, 0.0));
  mean_dense_.assign(resources.size(), std::vector<double>(m, 0.0));
  entry_dense_.assign(resources.size(), std::vector<int>(m, -1));
  for (const auto& f : replenishment.fixed) {
    fixed_dense_[f.resource][f.request - 1] = f.amount;
    mean_dense_[f.resource][f.request - 1] = f.amount;
  }
  for (size_t i = 0; i < replenishment.entries.size(); ++i) {
    const auto& e = replenishment.entries[i];
    mean_dense_[e.resource][e.request - 1] = e.mean;
    entry_dense_[e.resource][e.request - 1] = static_cast<int>(i);
  }
}

void Instance::validate() {
  // --- resources ---
  if (resources.empty()) fail("at least one resource is required");
  {
    std::set<std::string> seen;
    for (const auto& r : resources) {
      if (r.id.empty()) fail("resource id must be nonempty");
      if (r.id.find('/') != std::string::npos)
        fail("resource id '" + r.id + "' must not contain '/'");
      if (!seen.insert(r.id).second) fail("duplicate resource id '" + r.id + "'");
      if (!finite_nonneg(r.initial_inventory))
        fail("initial inventory of '" + r.id + "' must be finite and >= 0");
    }
  }
  bool any_original = false;
  for (auto& r : resources) {
    if (r.origin.original()) {
      r.root = static_cast<int>(&r - resources.data());
      any_original = true;
    }
  }
  if (!any_original) fail("at least one resource must be original");
  for (size_t i = 0; i < resources.size(); ++i) {
    Resource& r = resources[i];
    if (r.origin.original()) continue;
    int p = r.origin.parent;
    if (p < 0 || p >= num_resources() || static_cast<size_t>(p) == i)
      fail("resource '" + r.id + "' has an invalid origin parent");
    if (!resources[p].origin.original())
      fail("batched resource '" + r.id + "' must descend from an original resource");
    r.root = p;
    if (r.origin.created_at < 1 || r.origin.created_at > arrivals.horizon)
      fail("batched resource '" + r.id + "' created outside the horizon");
  }

  // --- arrivals ---
  const int m = arrivals.horizon;
  if (m < 1) fail("horizon must be >= 1");
  if (arrivals.types.empty()) fail("at least one type is required");
  for (const auto& t : arrivals.types)
    if (t.empty()) fail("type id must be nonempty");
  arrivals.type_ids.clear();
  for (const auto& t : arrivals.types)
    if (std::find(arrivals.type_ids.begin(), arrivals.type_ids.end(), t) ==
        arrivals.type_ids.end())
      arrivals.type_ids.push_back(t);
  arrivals.schedule.clear();
  if (arrivals.mode == ArrivalMode::Adversarial) {
    if (static_cast<int>(arrivals.types.size()) != m)
      fail("adversarial mode requires one type per request (|types| == horizon)");
    if (!arrivals.type_probs.empty()) fail("type_probs is not allowed in adversarial mode");
    for (const auto& t : arrivals.types) {
      auto it = std::find(arrivals.type_ids.begin(), arrivals.type_ids.end(), t);
      arrivals.schedule.push_back(static_cast<int>(it - arrivals.type_ids.begin()));
    }
  } else {
    if (static_cast<int>(arrivals.type_ids.size()) != static_cast<int>(arrivals.types.size()))
      fail("stochastic mode requires distinct type ids");
    if (static_cast<int>(arrivals.type_probs.size()) != m)
      fail("type_probs must have one row per request");
    for (int j = 0; j < m; ++j) {
      const auto& row = arrivals.type_probs[j];
      if (static_cast<int>(row.size()) != num_types())
        fail("type_probs row " + std::to_string(j + 1) + " has the wrong width");
      double sum = 0.0;
      for (double v : row) {
        if (!finite_nonneg(v) || v > 1.0 + 1e-12)
          fail("type probabilities must lie in [0, 1]");
        sum += v;
      }
      if (std::fabs(sum - 1.0) > 1e-12)
        fail("type distribution not normalized at request " + std::to_string(j + 1));
    }
  }

  // --- actions ---
  if (actions.empty()) fail("at least one action is required");
  {
    std::set<std::string> seen;
    for (const auto& a : actions) {
      if (a.id.empty()) fail("action id must be nonempty");
      if (!seen.insert(a.id).second) fail("duplicate action id '" + a.id + "'");
    }
  }
  d = 0;
  trivial_action = -1;
  for (size_t ai = 0; ai < actions.size(); ++ai) {
    Action& a = actions[ai];
    std::sort(a.uses.begin(), a.uses.end(),
              [](const ResourceUse& x, const ResourceUse& y) { return x.resource < y.resource; });
    for (size_t u = 1; u < a.uses.size(); ++u)
      if (a.uses[u].resource == a.uses[u - 1].resource)
        fail("action '" + a.id + "' uses a resource twice");
    for (const auto& u : a.uses) {
      if (u.resource < 0 || u.resource >= num_resources())
        fail("action '" + a.id + "' uses an unknown resource");
      const auto& p = u.profile;
      if (!(p.peak >= 0.0 && p.peak <= 1.0))
        fail("peak of action '" + a.id + "' must lie in [0, 1]");
      if (!(p.success_prob >= 0.0 && p.success_prob <= 1.0))
        fail("success_prob of action '" + a.id + "' must lie in [0, 1]");
    }
    d = std::max(d, static_cast<int>(a.uses.size()));

    std::sort(a.rewards.begin(), a.rewards.end(),
              [](const RewardEntry& x, const RewardEntry& y) {
                return std::tie(x.type, x.resource) < std::tie(y.type, y.resource);
              });
    for (size_t e = 1; e < a.rewards.size(); ++e)
      if (a.rewards[e].type == a.rewards[e - 1].type &&
          a.rewards[e].resource == a.rewards[e - 1].resource)
        fail("action '" + a.id + "' has a duplicate reward key");
    bool coupled = false;
    for (auto& e : a.rewards) {
      if (e.type < 0 || e.type >= num_types())
        fail("reward of action '" + a.id + "' references an unknown type");
      if (e.resource < 0 || e.resource >= num_resources())
        fail("reward of action '" + a.id + "' references an unknown resource");
      if (!resources[e.resource].origin.original())
        fail("reward of action '" + a.id + "' must be booked under an original resource");
      if (!finite_nonneg(e.value))
        fail("reward values of action '" + a.id + "' must be finite and >= 0");
      if (e.kind == RewardKind::CoupledToConsumption) coupled = true;
    }
    a.coupled_success = 1.0;
    if (coupled) {
      if (a.uses.empty())
        fail("action '" + a.id + "' has a coupled reward but consumes nothing");
      double s = a.uses.front().profile.success_prob;
      for (const auto& u : a.uses)
        if (std::fabs(u.profile.success_prob - s) > 0.0)
          fail("action '" + a.id + "' has a coupled reward; all uses must share one success_prob");
      a.coupled_success = s;
    }
    for (auto& e : a.rewards)
      e.expected = e.kind == RewardKind::Deterministic ? e.value : e.value * a.coupled_success;

    if (a.activation < 1 || a.activation > m + 1)
      fail("activation of action '" + a.id + "' must lie in [1, horizon + 1]");
    if (!a.origin.original()) {
      if (a.origin.root_action < 0 || a.origin.root_action >= num_actions())
        fail("action '" + a.id + "' has an invalid origin root");
      if (!actions[a.origin.root_action].origin.original())
        fail("duplicate action '" + a.id + "' must point at an original root action");
    }

    bool zero_reward = true;
    for (const auto& e : a.rewards)
      if (e.value > 0.0) zero_reward = false;
    a.is_trivial = a.uses.empty() && zero_reward;
    if (a.is_trivial && trivial_action < 0) trivial_action = static_cast<int>(ai);
  }
  if (trivial_action < 0) fail("the trivial action (empty uses, zero rewards) is required");

  // --- replenishment ---
  if (!finite_nonneg(replenishment.bound_M)) fail("bound_M must be finite and >= 0");
  {
    std::set<std::pair<int, int>> seen;
    for (const auto& f : replenishment.fixed) {
      if (replenishment.mode != ReplenishmentMode::Adversarial)
        fail("fixed replenishment entries require adversarial mode");
      if (f.resource < 0 || f.resource >= num_resources())
        fail("replenishment references an unknown resource");
      if (f.request < 1 || f.request > m) fail("replenishment request index out of range");
      if (!finite_nonneg(f.amount)) fail("replenishment amounts must be finite and >= 0");
      if (!seen.insert({f.resource, f.request}).second)
        fail("duplicate replenishment entry for one (resource, request)");
    }
    for (const auto& e : replenishment.entries) {
      if (replenishment.mode != ReplenishmentMode::Stochastic)
        fail("stochastic replenishment entries require stochastic mode");
      if (e.resource < 0 || e.resource >= num_resources())
        fail("replenishment references an unknown resource");
      if (e.request < 1 || e.request > m) fail("replenishment request index out of range");
      if (!finite_nonneg(e.support) || !finite_nonneg(e.mean))
        fail("replenishment w and q must be finite and >= 0");
      if (e.mean > e.support + 1e-15)
        fail("replenishment requires q <= w");
      if (e.support > replenishment.bound_M + 1e-12)
        fail("replenishment requires w <= bound_M");
      if (e.support == 0.0 && e.mean > 0.0) fail("replenishment requires q <= w");
      if (!seen.insert({e.resource, e.request}).second)
        fail("duplicate replenishment entry for one (resource, request)");
    }
  }
  auto by_res_req = [](int r1, int j1, int r2, int j2) {
    return std::tie(r1, j1) < std::tie(r2, j2);
  };
  std::sort(replenishment.fixed.begin(), replenishment.fixed.end(),
            [&](const FixedReplenishment& a, const FixedReplenishment& b) {
              return by_res_req(a.resource, a.request, b.resource, b.request);
            });
  std::sort(replenishment.entries.begin(), replenishment.entries.end(),
            [&](const StochasticReplenishment& a, const StochasticReplenishment& b) {
              return by_res_req(a.resource, a.request, b.resource, b.request);
            });

  // --- derived ---
  c_min = std::numeric_limits<double>::infinity();
  for (const auto& r : resources)
    if (r.origin.original()) c_min = std::min(c_min, r.initial_inventory);
  rebuild_indexes();
}

int Instance::resource_index(const std::string& id) const {
  auto it = res_index_.find(id);
  return it == res_index_.end() ? -1 : it->second;
}

int Instance::action_index(const std::string& id) const {
  auto it = act_index_.find(id);
  return it == act_index_.end() ? -1 : it->second;
}

int Instance::type_index(const std::string& id) const {
  auto it = type_index_.find(id);
  return it == type_index_.end() ? -1 : it->second;
}

double Instance::type_prob(int request, int type) const {
  if (arrivals.mode == ArrivalMode::Adversarial)
    return arrivals.schedule[request - 1] == type ? 1.0 : 0.0;
  return arrivals.type_probs[request - 1][type];
}

int Instance::scheduled_type(int request) const {
  if (arrivals.mode != ArrivalMode::Adversarial)
    throw std::runtime_error("scheduled_type requires adversarial arrivals");
  return arrivals.schedule[request - 1];
}

double Instance::fixed_replenishment(int resource, int request) const {
  return fixed_dense_[resource][request - 1];
}

double Instance::mean_replenishment(int resource, int request) const {
  return mean_dense_[resource][request - 1];
}

const StochasticReplenishment* Instance::stochastic_entry(int resource, int request) const {
  int e = entry_dense_[resource][request - 1];
  return e < 0 ? nullptr : &replenishment.entries[e];
}

double Instance::expected_consumption(int resource, int request, int action,
                                      int type, int l) const {
  if (l < request)
    throw std::runtime_error("expected_consumption requires l >= j");
  (void)type;  // consumption law is type-independent given the action
  const ConsumptionProfile* p = actions[action].profile_for(resource);
  if (p == nullptr) return 0.0;
  return p->peak * p->success_prob * p->release.survival(l - request);
}

double Instance::expected_reward(int resource, int request, int action, int type) const {
  const Action& a = actions[action];
  if (request < a.activation) return 0.0;
  int root = resources[resource].root;
  for (const auto& e : a.rewards)
    if (e.type == type && e.resource == root) return e.expected;
  return 0.0;
}

double Instance::total_expected_reward(int request, int action, int type) const {
  const Action& a = actions[action];
  if (request < a.activation) return 0.0;
  double sum = 0.0;
  for (const auto& e : a.rewards)
    if (e.type == type) sum += e.expected;
  return sum;
}

double Instance::expected_consumption(const std::string& resource, int request,
                                      const std::string& action,
                                      const std::string& type, int l) const {
  int r = resource_index(resource), k = action_index(action), z = type_index(type);
  if (r < 0 || k < 0 || z < 0)
    throw std::runtime_error("expected_consumption: unknown id");
  return expected_consumption(r, request, k, z, l);
}

double Instance::expected_reward(const std::string& resource, int request,
                                 const std::string& action,
                                 const std::string& type) const {
  int r = resource_index(resource), k = action_index(action), z = type_index(type);
  if (r < 0 || k < 0 || z < 0)
    throw std::runtime_error("expected_reward: unknown id");
  return expected_reward(r, request, k, z);
}

int Instance::add_batched_resource(int parent, int request, double amount) {
  if (parent < 0 || parent >= num_resources() || !resources[parent].origin.original())
    throw std::runtime_error("batched resource requires an original parent");
  Resource r;
  r.id = resources[parent].id + "@" + std::to_string(request);
  if (res_index_.count(r.id))
    throw std::runtime_error("batched resource id '" + r.id + "' collides with an existing id");
  r.initial_inventory = amount;
  r.origin.parent = parent;
  r.origin.created_at = request;
  r.root = parent;
  int idx = num_resources();
  resources.push_back(std::move(r));
  res_index_[resources.back().id] = idx;
  const int m = arrivals.horizon;
  fixed_dense_.emplace_back(m, 0.0);
  mean_dense_.emplace_back(m, 0.0);
  entry_dense_.emplace_back(m, -1);
  return idx;
}

int Instance::add_duplicate_action(int action, int parent_resource,
                                   int new_resource, int request) {
  const Action& src = actions[action];
  Action a;
  a.id = src.id + "@" + resources[new_resource].id;
  if (act_index_.count(a.id))
    throw std::runtime_error("duplicate action id '" + a.id + "' collides with an existing id");
  a.uses = src.uses;
  bool replaced = false;
  for (auto& u : a.uses) {
    if (u.resource == parent_resource) {
      u.resource = new_resource;
      replaced = true;
    }
  }
  if (!replaced)
    throw std::runtime_error("duplicate of '" + src.id + "' does not use the batched parent");
  std::sort(a.uses.begin(), a.uses.end(),
            [](const ResourceUse& x, const ResourceUse& y) { return x.resource < y.resource; });
  a.rewards = src.rewards;  // booked under original resources, unchanged
  a.activation = request;
  a.origin.root_action = src.origin.original() ? action : src.origin.root_action;
  a.origin.substituted_resource = new_resource;
  a.is_trivial = false;
  a.coupled_success = src.coupled_success;
  int idx = num_actions();
  actions.push_back(std::move(a));
  act_index_[actions.back().id] = idx;
  return idx;
}

}  // namespace replsim
