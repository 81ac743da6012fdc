#include "quis/json_io.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

namespace quis {

namespace fs = std::filesystem;

namespace {

Json bound_to_json(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

// Collects structural problems instead of stopping at the first one.
class Reader {
public:
    std::vector<Diagnostic> diags;

    void fail(const std::string& code, const std::string& subject, const std::string& msg) {
        diags.push_back({Severity::Error, code, subject, msg});
    }

    const Json* field(const Json& obj, const char* name, const std::string& subject, bool required = true) {
        auto it = obj.find(name);
        if (it == obj.end() || it->is_null()) {
            if (required) fail("MissingField", subject, std::string("missing field '") + name + "'");
            return nullptr;
        }
        return &*it;
    }

    std::optional<std::string> string(const Json& obj, const char* name, const std::string& subject,
                                      bool required = true) {
        const Json* v = field(obj, name, subject, required);
        if (!v) return std::nullopt;
        if (!v->is_string()) {
            fail("WrongType", subject, std::string("'") + name + "' must be a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<double> number(const Json& obj, const char* name, const std::string& subject,
                                 bool required = true) {
        const Json* v = field(obj, name, subject, required);
        if (!v) return std::nullopt;
        if (!v->is_number()) {
            fail("WrongType", subject, std::string("'") + name + "' must be a number");
            return std::nullopt;
        }
        return v->get<double>();
    }

    std::optional<bool> boolean(const Json& obj, const char* name, const std::string& subject) {
        const Json* v = field(obj, name, subject, false);
        if (!v) return std::nullopt;
        if (!v->is_boolean()) {
            fail("WrongType", subject, std::string("'") + name + "' must be true or false");
            return std::nullopt;
        }
        return v->get<bool>();
    }

    std::optional<double> bound(const Json& v, const std::string& subject) {
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) {
            const auto s = v.get<std::string>();
            if (s == "inf" || s == "+inf") return kUnbounded;
            if (s == "-inf") return -kUnbounded;
        }
        fail("WrongType", subject, "bound must be a number, \"inf\" or \"-inf\"");
        return std::nullopt;
    }
};

DecisionCriterion criterion_from_json(const Json& doc, std::size_t index, Reader& rd) {
    DecisionCriterion c;
    std::string subject = "criteria[" + std::to_string(index) + "]";
    if (!doc.is_object()) {
        rd.fail("WrongType", subject, "criterion must be an object");
        return c;
    }
    if (auto id = rd.string(doc, "id", subject)) {
        c.id = *id;
        subject = c.id;
    }
    c.label = rd.string(doc, "label", subject, false).value_or("");
    if (auto text = rd.string(doc, "expression", subject)) {
        c.expression_text = *text;
        try {
            c.expression = parse_expression(*text);
        } catch (const Error& e) {
            rd.fail(std::string(to_string(e.code())), subject, e.what());
        }
    }
    if (const Json* b = rd.field(doc, "bounds", subject)) {
        if (!b->is_array() || b->size() != 2) {
            rd.fail("WrongType", subject, "'bounds' must be a two-element array");
        } else {
            c.bound_low = rd.bound((*b)[0], subject).value_or(c.bound_low);
            c.bound_high = rd.bound((*b)[1], subject).value_or(c.bound_high);
        }
    }
    if (const Json* s = rd.field(doc, "strategy", subject, false)) {
        if (!s->is_object()) {
            rd.fail("WrongType", subject, "'strategy' must be an object");
        } else {
            if (auto kind = rd.string(*s, "kind", subject, false)) {
                if (auto k = parse_rating_kind(*kind)) c.strategy.kind = *k;
                else rd.fail("UnknownStrategy", subject, "unknown rating kind '" + *kind + "'");
            }
            if (auto dir = rd.string(*s, "direction", subject, false)) {
                if (auto d = parse_direction(*dir)) c.strategy.direction = *d;
                else rd.fail("UnknownStrategy", subject, "unknown direction '" + *dir + "'");
            }
            if (auto oob = rd.string(*s, "out_of_bounds", subject, false)) {
                if (auto o = parse_out_of_bounds(*oob)) c.strategy.out_of_bounds = *o;
                else rd.fail("UnknownStrategy", subject, "unknown out_of_bounds mode '" + *oob + "'");
            }
            c.strategy.exponent = rd.number(*s, "exponent", subject, false).value_or(c.strategy.exponent);
        }
    }
    c.weight = rd.number(doc, "weight", subject, false).value_or(1.0);
    c.must_have = rd.boolean(doc, "must_have", subject).value_or(false);
    c.threshold = rd.number(doc, "threshold", subject, false).value_or(1.0);
    return c;
}

}  // namespace

UserRequirementProfile profile_from_json(const Json& doc) {
    Reader rd;
    UserRequirementProfile p;
    if (!doc.is_object()) {
        rd.fail("WrongType", "", "profile must be a JSON object");
        throw DiagnosticError(ErrorCode::InvalidProfile, rd.diags);
    }
    p.name = rd.string(doc, "name", "profile", false).value_or("");
    if (auto y = rd.number(doc, "year", "profile")) p.year = static_cast<int>(*y);
    if (auto lvl = rd.string(doc, "target_level", "profile", false)) {
        if (auto l = parse_level(*lvl)) p.target_level = *l;
        else rd.fail("UnknownLevel", "profile", "unknown level '" + *lvl + "'");
    }
    if (const Json* focus = rd.field(doc, "region_focus", "profile", false)) {
        if (!focus->is_array()) {
            rd.fail("WrongType", "profile", "'region_focus' must be an array of region keys");
        } else {
            for (const auto& k : *focus) {
                if (!k.is_string()) {
                    rd.fail("WrongType", "region_focus", "region key must be a string");
                    continue;
                }
                try {
                    p.region_focus.push_back(parse_region_key(k.get<std::string>()));
                } catch (const Error& e) {
                    rd.fail(std::string(to_string(e.code())), k.get<std::string>(), e.what());
                }
            }
        }
    }
    if (const Json* criteria = rd.field(doc, "criteria", "profile")) {
        if (!criteria->is_array()) rd.fail("WrongType", "profile", "'criteria' must be an array");
        else
            for (std::size_t i = 0; i < criteria->size(); ++i)
                p.criteria.push_back(criterion_from_json((*criteria)[i], i, rd));
    }
    if (const Json* ex = rd.field(doc, "exclusions", "profile", false)) {
        bool ok = ex->is_array();
        if (ok) {
            for (const auto& pair : *ex) {
                if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
                    ok = false;
                    break;
                }
                p.exclusions.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
            }
        }
        if (!ok) rd.fail("WrongType", "exclusions", "'exclusions' must be an array of [id, id] pairs");
    }
    if (!rd.diags.empty()) throw DiagnosticError(ErrorCode::InvalidProfile, rd.diags);
    return p;
}

Json to_json(const UserRequirementProfile& p) {
    Json doc;
    doc["name"] = p.name;
    doc["year"] = p.year;
    doc["target_level"] = to_string(p.target_level);
    doc["region_focus"] = Json::array();
    for (const auto& k : p.region_focus) doc["region_focus"].push_back(k.raw());
    doc["criteria"] = Json::array();
    for (const auto& c : p.criteria) {
        Json j;
        j["id"] = c.id;
        j["label"] = c.label;
        j["expression"] = c.expression_text;
        j["bounds"] = Json::array({bound_to_json(c.bound_low), bound_to_json(c.bound_high)});
        j["strategy"] = {{"kind", to_string(c.strategy.kind)},
                         {"direction", to_string(c.strategy.direction)},
                         {"out_of_bounds", to_string(c.strategy.out_of_bounds)},
                         {"exponent", c.strategy.exponent}};
        j["weight"] = c.weight;
        j["must_have"] = c.must_have;
        j["threshold"] = c.threshold;
        doc["criteria"].push_back(std::move(j));
    }
    doc["exclusions"] = Json::array();
    for (const auto& [a, b] : p.exclusions) doc["exclusions"].push_back(Json::array({a, b}));
    return doc;
}

UserRequirementProfile load_profile(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read profile " + path.string());
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::InvalidProfile, path.string() + ": " + e.what());
    }
    return profile_from_json(doc);
}

void save_profile(const UserRequirementProfile& profile, const fs::path& path) {
    static std::atomic<unsigned> counter{0};
    std::ostringstream suffix;
    suffix << ".tmp-" << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '-' << counter++;
    const fs::path tmp = path.string() + suffix.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
        out << to_json(profile).dump(2) << '\n';
        out.flush();
        if (!out) throw Error(ErrorCode::Io, "failed writing " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorCode::Io, "cannot replace " + path.string());
    }
}

Json to_json(const Diagnostic& d) {
    return {{"severity", d.severity == Severity::Error ? "error" : "warning"},
            {"code", d.code},
            {"subject", d.subject},
            {"message", d.message}};
}

Json to_json(const std::vector<Diagnostic>& ds) {
    Json out = Json::array();
    for (const auto& d : ds) out.push_back(to_json(d));
    return out;
}

Json to_json(const Site& s) {
    return {{"key", s.key.raw()},
            {"name", s.name},
            {"level", to_string(s.level)},
            {"parent", s.parent ? Json(s.parent->raw()) : Json(nullptr)}};
}

Json to_json(const FactorDescriptor& d) {
    return {{"id", d.id}, {"name", d.name}, {"unit", d.unit}, {"aggregation", to_string(d.aggregation)}};
}

Json to_json(const FactorSeries& s) {
    Json points = Json::array();
    for (std::size_t i = 0; i < s.years.size(); ++i) points.push_back({{"year", s.years[i]}, {"value", s.values[i]}});
    return {{"factor", s.factor}, {"site", s.site.raw()}, {"points", std::move(points)}};
}

Json to_json(const CriterionResult& r) {
    Json j{{"criterion", r.criterion_id},
           {"raw_value", optional_number(r.raw_value)},
           {"score", r.score},
           {"passed", r.passed}};
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

Json to_json(const SiteEvaluation& e) {
    Json per = Json::array();
    for (const auto& r : e.per_criterion) per.push_back(to_json(r));
    return {{"site", e.site.raw()},
            {"total_score", e.total_score},
            {"eliminated", e.eliminated},
            {"elimination_reasons", e.elimination_reasons},
            {"criteria", std::move(per)}};
}

Json to_json(const RecommendationRun& run) {
    Json ranked = Json::array();
    for (const auto& r : run.ranked) {
        Json j = to_json(r.evaluation);
        j["rank"] = r.rank;
        ranked.push_back(std::move(j));
    }
    Json reasons = Json::object();
    for (const auto& [id, n] : run.elimination_reasons) reasons[id] = n;
    return {{"ranked", std::move(ranked)},
            {"candidates", run.candidates},
            {"eliminated", run.eliminated},
            {"below_cutoff", run.below_cutoff},
            {"excluded", run.excluded},
            {"truncated", run.truncated},
            {"elimination_reasons", std::move(reasons)}};
}

Json to_json(const CoverageReport& c) {
    return {{"chain", c.chain},
            {"existing", c.existing},
            {"recommended_among_existing", c.recommended_among_existing},
            {"percentage", c.percentage}};
}

Json to_json(const ConfusionMatrix& m) {
    return {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}, {"total", m.total()}};
}

Json to_json(const MetricSet& m) {
    return {{"recall", m.recall},
            {"precision", m.precision},
            {"f_beta", m.f_beta},
            {"beta", m.beta},
            {"degenerate", m.degenerate}};
}

Json to_json(const CorrelationMatrix& m) {
    Json r = Json::array();
    for (const auto& row : m.r) {
        Json line = Json::array();
        for (const auto& v : row) line.push_back(optional_number(v));
        r.push_back(std::move(line));
    }
    Json dropped = Json::array();
    for (const auto& k : m.dropped_sites) dropped.push_back(k.raw());
    return {{"rows", m.rows},
            {"cols", m.cols},
            {"r", std::move(r)},
            {"sites", m.sites.size()},
            {"dropped_sites", std::move(dropped)}};
}

Json to_json(const BucketReport& b) {
    auto keys = [](const std::vector<RegionKey>& ks) {
        Json a = Json::array();
        for (const auto& k : ks) a.push_back(k.raw());
        return a;
    };
    Json buckets = Json::array();
    for (const auto& bk : b.buckets) {
        buckets.push_back({{"label", bk.label},
                           {"lo", bk.lo},
                           {"hi", bk.hi},
                           {"count", bk.sites.size()},
                           {"mean", optional_number(bk.mean_factor_value)},
                           {"sites", keys(bk.sites)}});
    }
    return {{"buckets", std::move(buckets)}, {"above_range", keys(b.above_range)}, {"dropped", keys(b.dropped)}};
}

Json to_json(const WilcoxonResult& w) {
    return {{"w", w.w},
            {"u", w.u},
            {"p_value", w.p_value},
            {"z", w.z},
            {"method", to_string(w.method)},
            {"degenerate", w.degenerate}};
}

Json to_json(const Explanation& e) {
    Json criteria = Json::array();
    for (const auto& c : e.criteria) {
        Json used = Json::array();
        for (const auto& f : c.factors_used) {
            Json u{{"factor", f.factor},
                   {"value", optional_number(f.value)},
                   {"source", f.source ? Json(f.source->raw()) : Json(nullptr)},
                   {"year", f.year}};
            if (!f.error.empty()) u["error"] = f.error;
            used.push_back(std::move(u));
        }
        Json j{{"id", c.id},
               {"label", c.label},
               {"expression", c.expression},
               {"factors_used", std::move(used)},
               {"raw_value", optional_number(c.raw_value)},
               {"bounds", Json::array({bound_to_json(c.bound_low), bound_to_json(c.bound_high)})},
               {"strategy", to_string(c.strategy.kind)},
               {"direction", to_string(c.strategy.direction)},
               {"score", c.score},
               {"weight", c.weight},
               {"contribution", c.contribution},
               {"must_have", c.must_have},
               {"threshold", c.threshold},
               {"passed", c.passed}};
        if (!c.error.empty()) j["error"] = c.error;
        criteria.push_back(std::move(j));
    }
    return {{"site", e.site.raw()},
            {"name", e.site_name},
            {"profile", e.profile},
            {"verdict", to_string(e.verdict)},
            {"out_of_focus", e.out_of_focus},
            {"cutoff_reason", e.cutoff_reason},
            {"total_score", e.total_score},
            {"criteria", std::move(criteria)},
            {"top_positive", e.top_positive},
            {"failures", e.failures}};
}

Json to_json(const ExplanationDiff& d) {
    Json per = Json::array();
    for (const auto& c : d.per_criterion)
        per.push_back(
            {{"id", c.id}, {"score_a", c.score_a}, {"score_b", c.score_b}, {"delta", c.delta}, {"weight", c.weight}});
    return {{"site_a", d.site_a.raw()},
            {"site_b", d.site_b.raw()},
            {"total_a", d.total_a},
            {"total_b", d.total_b},
            {"per_criterion", std::move(per)},
            {"decisive", d.decisive ? Json(*d.decisive) : Json(nullptr)}};
}

Json to_json(const ChainEvaluation& e) {
    Json without = Json::array();
    for (const auto& k : e.without_markets) without.push_back(k.raw());
    return {{"chain", e.chain},
            {"profile", e.profile},
            {"universe", e.universe},
            {"recommended", e.recommended},
            {"confusion", to_json(e.confusion)},
            {"metrics", to_json(e.metrics)},
            {"coverage", to_json(e.coverage)},
            {"without_markets", std::move(without)}};
}

}  // namespace quis
