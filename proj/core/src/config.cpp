#include "selfpref/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <set>

#include <toml.hpp>

#include "selfpref/error.hpp"
#include "selfpref/io.hpp"
#include "selfpref/random.hpp"

namespace selfpref {

const EvaluatorConfig& AuditConfig::evaluator(std::string_view name) const {
  auto it = evaluators.find(std::string(name));
  if (it == evaluators.end()) {
    std::string known;
    for (const auto& [k, _] : evaluators) known += (known.empty() ? "" : ", ") + k;
    throw ValidationError("unknown evaluator '" + std::string(name) + "' (defined: " +
                          (known.empty() ? "none" : known) + ")");
  }
  return it->second;
}

const ModelConfig& AuditConfig::model(std::string_view name) const {
  auto it = models.find(std::string(name));
  if (it == models.end()) throw ValidationError("unknown model '" + std::string(name) + "'");
  return it->second;
}

std::string interpolate_env(std::string_view text, const EnvLookup& env) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '$') {
      out.push_back(text[i]);
      continue;
    }
    if (i + 1 < text.size() && text[i + 1] == '$') {
      out.push_back('$');
      ++i;
      continue;
    }
    if (i + 1 < text.size() && text[i + 1] == '{') {
      const auto close = text.find('}', i + 2);
      if (close == std::string_view::npos) throw ValidationError("unterminated ${ in config value");
      const auto name = text.substr(i + 2, close - i - 2);
      const auto value = env ? env(name) : std::nullopt;
      if (!value) {
        throw ValidationError("environment variable '" + std::string(name) + "' is not set");
      }
      out += *value;
      i = close;
      continue;
    }
    out.push_back('$');
  }
  return out;
}

std::string hex_hash(std::string_view text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
  return buf;
}

namespace {

class Reader {
 public:
  Reader(const toml::table& t, std::string where, const EnvLookup& env)
      : t_(t), where_(std::move(where)), env_(env) {}

  void allow(std::initializer_list<std::string_view> keys) const {
    std::set<std::string_view> ok(keys);
    for (const auto& [k, _] : t_) {
      if (!ok.count(k.str())) {
        throw ValidationError(where_ + ": unknown key '" + std::string(k.str()) + "'");
      }
    }
  }

  std::optional<std::string> str(std::string_view key) const {
    const auto* n = t_.get(key);
    if (!n) return std::nullopt;
    const auto v = n->value<std::string>();
    if (!v || !n->is_string()) fail(key, "a string");
    return interpolate_env(*v, env_);
  }

  template <typename T>
  std::optional<T> num(std::string_view key) const {
    const auto* n = t_.get(key);
    if (!n) return std::nullopt;
    if constexpr (std::is_floating_point_v<T>) {
      if (!n->is_number()) fail(key, "a number");
      return static_cast<T>(*n->value<double>());
    } else {
      if (!n->is_integer()) fail(key, "an integer");
      const auto v = *n->value<std::int64_t>();
      if constexpr (std::is_unsigned_v<T>) {
        if (v < 0) fail(key, "a non-negative integer");
      }
      return static_cast<T>(v);
    }
  }

  std::optional<std::vector<std::string>> strings(std::string_view key) const {
    const auto* n = t_.get(key);
    if (!n) return std::nullopt;
    const auto* arr = n->as_array();
    if (!arr) fail(key, "an array of strings");
    std::vector<std::string> out;
    for (const auto& el : *arr) {
      if (!el.is_string()) fail(key, "an array of strings");
      out.push_back(interpolate_env(*el.value<std::string>(), env_));
    }
    return out;
  }

  std::optional<Reader> sub(std::string_view key) const {
    const auto* n = t_.get(key);
    if (!n) return std::nullopt;
    const auto* t = n->as_table();
    if (!t) fail(key, "a table");
    return Reader(*t, where_.empty() ? std::string(key) : where_ + "." + std::string(key), env_);
  }

  const toml::table& table() const { return t_; }
  const std::string& where() const { return where_; }

 private:
  [[noreturn]] void fail(std::string_view key, std::string_view what) const {
    throw ValidationError((where_.empty() ? "" : where_ + ".") + std::string(key) + " must be " +
                          std::string(what));
  }

  const toml::table& t_;
  std::string where_;
  const EnvLookup& env_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::filesystem::path existing(const std::filesystem::path& base, const std::string& p,
                               std::string_view what) {
  auto path = resolve(base, p);
  if (!std::filesystem::exists(path)) {
    throw ValidationError(std::string(what) + " not found: " + path.string());
  }
  return path;
}

llm::ModelEndpoint read_endpoint(const Reader& r, const std::string& name) {
  llm::ModelEndpoint e;
  e.model = r.str("model").value_or(name);
  e.provider = llm::parse_provider(r.str("provider").value_or("openai"));
  e.base_url = r.str("base_url").value_or("");
  e.api_key_env = r.str("api_key_env").value_or("");
  if (auto v = r.num<int>("max_retries")) e.max_retries = *v;
  if (auto v = r.num<double>("timeout_seconds")) e.timeout_seconds = *v;
  if (auto v = r.num<std::size_t>("max_parallel")) e.max_parallel = *v;
  if (auto v = r.num<double>("initial_backoff_seconds")) e.initial_backoff_seconds = *v;
  if (e.base_url.empty()) throw ValidationError(r.where() + ": base_url is required");
  e.validate();
  return e;
}

}  // namespace

AuditConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                         const ConfigOverrides& overrides, const EnvLookup& env_in,
                         std::string_view source_name) {
  EnvLookup env = env_in ? env_in : EnvLookup([](std::string_view name) -> std::optional<std::string> {
    if (const char* v = std::getenv(std::string(name).c_str())) return std::string(v);
    return std::nullopt;
  });

  toml::table root;
  try {
    root = toml::parse(text, std::string(source_name));
  } catch (const toml::parse_error& e) {
    const auto& where = e.source().begin;
    throw ParseError(std::string(source_name) + ":" + std::to_string(where.line) + ":" +
                     std::to_string(where.column) + ": " + std::string(e.description()));
  }

  AuditConfig c;
  c.source = source_name;
  Reader top(root, "", env);
  top.allow({"project", "corpus", "features", "bootstrap", "annotations", "generation", "pairing",
             "models", "evaluators", "simulation"});

  if (auto p = top.sub("project")) {
    p->allow({"seed", "output_dir"});
    c.seed = p->num<std::uint64_t>("seed").value_or(0);
    c.output_dir = resolve(base_dir, p->str("output_dir").value_or("out"));
  } else {
    c.output_dir = resolve(base_dir, "out");
  }
  if (overrides.seed) c.seed = *overrides.seed;
  if (overrides.output_dir) c.output_dir = *overrides.output_dir;

  auto corpus = top.sub("corpus");
  if (!corpus) throw ValidationError("[corpus] section is required");
  corpus->allow({"path", "format", "quality", "columns", "synthetic"});
  if (auto p = corpus->str("path")) {
    c.corpus_path = existing(base_dir, *p, "corpus file");
    if (auto f = format_from_path(*c.corpus_path)) c.load.format = *f;
  }
  if (auto f = corpus->str("format")) {
    if (*f == "csv") {
      c.load.format = CorpusFormat::Csv;
    } else if (*f == "json") {
      c.load.format = CorpusFormat::Json;
    } else {
      throw ValidationError("corpus.format must be csv or json");
    }
  }
  if (auto q = corpus->str("quality")) c.quality_path = existing(base_dir, *q, "quality file");
  if (auto cols = corpus->sub("columns")) {
    cols->allow({"id", "category", "summary", "body", "source", "origin_id", "full_text"});
    auto& m = c.load.columns;
    m.id = cols->str("id").value_or(m.id);
    m.category = cols->str("category").value_or(m.category);
    m.summary = cols->str("summary").value_or(m.summary);
    m.body = cols->str("body").value_or(m.body);
    m.source = cols->str("source").value_or(m.source);
    m.origin_id = cols->str("origin_id").value_or(m.origin_id);
    m.full_text = cols->str("full_text").value_or(m.full_text);
  }
  if (auto s = corpus->sub("synthetic")) {
    s->allow({"categories", "per_category", "quality_sd"});
    SyntheticCorpusOptions o;
    o.categories = s->num<std::size_t>("categories").value_or(o.categories);
    o.per_category = s->num<std::size_t>("per_category").value_or(o.per_category);
    o.counterfactual_quality_sd = s->num<double>("quality_sd").value_or(o.counterfactual_quality_sd);
    o.seed = c.seed;
    c.synthetic = o;
  }
  if (c.corpus_path.has_value() == c.synthetic.has_value()) {
    throw ValidationError("[corpus] needs exactly one of path or [corpus.synthetic]");
  }

  if (auto f = top.sub("features")) {
    f->allow({"lexicon", "external_scores", "top_k", "ridge"});
    if (auto p = f->str("lexicon")) c.lexicon_path = existing(base_dir, *p, "lexicon file");
    if (auto p = f->str("external_scores")) {
      c.external_scores_path = existing(base_dir, *p, "external score file");
    }
    c.top_k = f->num<std::size_t>("top_k").value_or(c.top_k);
    c.ridge = f->num<double>("ridge").value_or(c.ridge);
    if (c.ridge < 0) throw ValidationError("features.ridge must be >= 0");
  }
  if (auto b = top.sub("bootstrap")) {
    b->allow({"resamples", "threads"});
    c.bootstrap_resamples = b->num<std::size_t>("resamples").value_or(c.bootstrap_resamples);
    c.bootstrap_threads = b->num<std::size_t>("threads").value_or(c.bootstrap_threads);
    if (c.bootstrap_resamples == 0) throw ValidationError("bootstrap.resamples must be positive");
  }
  if (auto a = top.sub("annotations")) {
    a->allow({"path", "scale_min", "scale_max"});
    if (auto p = a->str("path")) c.annotations_path = existing(base_dir, *p, "annotation file");
    c.rating_scale.min = a->num<int>("scale_min").value_or(c.rating_scale.min);
    c.rating_scale.max = a->num<int>("scale_max").value_or(c.rating_scale.max);
    if (c.rating_scale.min >= c.rating_scale.max) {
      throw ValidationError("annotations.scale_min must be below scale_max");
    }
  }
  if (auto g = top.sub("generation")) {
    g->allow({"min_words", "max_words", "max_attempts", "temperature", "max_tokens"});
    auto& o = c.generation;
    o.range.min_words = g->num<int>("min_words").value_or(o.range.min_words);
    o.range.max_words = g->num<int>("max_words").value_or(o.range.max_words);
    o.max_attempts = g->num<int>("max_attempts").value_or(o.max_attempts);
    o.temperature = g->num<double>("temperature").value_or(o.temperature);
    o.max_tokens = g->num<int>("max_tokens").value_or(o.max_tokens);
    if (o.range.min_words < 1 || o.range.min_words > o.range.max_words || o.max_attempts < 1) {
      throw ValidationError("generation: need 1 <= min_words <= max_words and max_attempts >= 1");
    }
  }
  if (auto p = top.sub("pairing")) {
    p->allow({"order"});
    if (auto o = p->str("order")) c.order = parse_order_mode(*o);
  }

  if (auto ms = top.sub("models")) {
    for (const auto& [key, node] : ms->table()) {
      const std::string name(key.str());
      const auto* t = node.as_table();
      if (!t) throw ValidationError("models." + name + " must be a table");
      Reader r(*t, "models." + name, env);
      r.allow({"model", "provider", "base_url", "api_key_env", "max_retries", "timeout_seconds",
               "max_parallel", "initial_backoff_seconds", "mock", "echo_words"});
      ModelConfig m;
      m.name = name;
      if (auto mock = r.str("mock")) {
        if (*mock != "synthetic" && *mock != "echo") {
          throw ValidationError("models." + name + ".mock must be synthetic or echo");
        }
        m.mock = *mock;
        m.echo_words = r.num<std::size_t>("echo_words").value_or(m.echo_words);
      } else {
        m.endpoint = read_endpoint(r, name);
      }
      Source::model(name);  // rejects reserved names
      c.models[name] = std::move(m);
    }
  }
  if (auto es = top.sub("evaluators")) {
    for (const auto& [key, node] : es->table()) {
      const std::string name(key.str());
      const auto* t = node.as_table();
      if (!t) throw ValidationError("evaluators." + name + " must be a table");
      Reader r(*t, "evaluators." + name, env);
      EvaluatorConfig e;
      e.name = name;
      const auto kind = r.str("kind").value_or("mock");
      if (kind == "mock") {
        r.allow({"kind", "self_model", "p_self", "recognition_rate", "quality_weight",
                 "position_bias", "debias_effectiveness", "seed"});
        e.kind = EvaluatorConfig::Kind::Mock;
        auto& m = e.mock;
        m.self_model = r.str("self_model").value_or("");
        m.p_self = r.num<double>("p_self").value_or(m.p_self);
        m.recognition_rate = r.num<double>("recognition_rate").value_or(m.recognition_rate);
        m.quality_weight = r.num<double>("quality_weight").value_or(m.quality_weight);
        m.position_bias = r.num<double>("position_bias").value_or(m.position_bias);
        m.debias_effectiveness =
            r.num<double>("debias_effectiveness").value_or(m.debias_effectiveness);
        m.seed = r.num<std::uint64_t>("seed").value_or(derive_seed(c.seed, name));
        try {
          m.validate();
        } catch (const ValidationError& err) {
          throw ValidationError("evaluators." + name + ": " + err.what());
        }
      } else if (kind == "llm") {
        r.allow({"kind", "model"});
        e.kind = EvaluatorConfig::Kind::Llm;
        e.model = r.str("model").value_or(name);
      } else if (kind == "panel") {
        r.allow({"kind", "members"});
        e.kind = EvaluatorConfig::Kind::Panel;
        e.members = r.strings("members").value_or(std::vector<std::string>{});
        if (e.members.size() != 3) {
          throw ValidationError("evaluators." + name + ".members must list exactly three evaluators");
        }
      } else {
        throw ValidationError("evaluators." + name + ".kind must be mock, llm or panel");
      }
      c.evaluators[name] = std::move(e);
    }
  }
  for (const auto& [name, e] : c.evaluators) {
    if (e.kind == EvaluatorConfig::Kind::Llm) {
      const auto it = c.models.find(e.model);
      if (it == c.models.end() || !it->second.endpoint) {
        throw ValidationError("evaluator '" + name + "' references model '" + e.model +
                              "', which has no provider endpoint in [models]");
      }
    } else if (e.kind == EvaluatorConfig::Kind::Panel) {
      for (const auto& m : e.members) {
        auto it = c.evaluators.find(m);
        if (it == c.evaluators.end()) {
          throw ValidationError("panel '" + name + "' references undefined evaluator '" + m + "'");
        }
        if (it->second.kind == EvaluatorConfig::Kind::Panel) {
          throw ValidationError("panel '" + name + "' cannot contain another panel");
        }
      }
    }
  }

  if (auto s = top.sub("simulation")) {
    s->allow({"categories", "runs_per_category", "profiles_per_run", "slots", "max_redraws"});
    auto& p = c.simulation;
    p.categories = s->strings("categories").value_or(p.categories);
    p.runs_per_category = s->num<std::size_t>("runs_per_category").value_or(p.runs_per_category);
    p.profiles_per_run = s->num<std::size_t>("profiles_per_run").value_or(p.profiles_per_run);
    p.slots = s->num<std::size_t>("slots").value_or(p.slots);
    p.max_redraws = s->num<std::size_t>("max_redraws").value_or(p.max_redraws);
  }
  c.simulation.seed = derive_seed(c.seed, std::string_view("simulation"));
  c.simulation.validate();

  std::string hashed(text);
  hashed += "\nseed=" + std::to_string(c.seed);
  c.hash = hex_hash(hashed);
  return c;
}

AuditConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  const auto text = read_text_file(path);
  auto c = parse_config(text, path.parent_path(), overrides, {}, path.string());
  c.source = path;
  return c;
}

}  // namespace selfpref
