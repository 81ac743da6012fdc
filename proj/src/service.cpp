#include "quis/service.hpp"

#include "quis/evaluation.hpp"
#include "quis/explain.hpp"
#include "quis/json_io.hpp"

#include <httplib.h>

#include <charconv>
#include <map>
#include <mutex>
#include <regex>
#include <shared_mutex>
#include <sstream>
#include <thread>

namespace quis {

namespace fs = std::filesystem;

namespace {

int status_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::UnknownSite:
    case ErrorCode::UnknownFactor:
    case ErrorCode::UnknownProfile:
    case ErrorCode::UnknownChain: return 404;
    case ErrorCode::WrongLength:
    case ErrorCode::NonDigit:
    case ErrorCode::ZeroState:
    case ErrorCode::InconsistentKey:
    case ErrorCode::LevelTooCoarse:
    case ErrorCode::WrongLevel:
    case ErrorCode::Usage: return 400;
    case ErrorCode::Io: return 500;
    default: return 422;
    }
}

// Thrown by handlers for request-shape problems.
struct BadRequest : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                const std::vector<Diagnostic>& diags = {}) {
    Json body{{"error", {{"code", code}, {"message", message}}}};
    if (!diags.empty()) body["diagnostics"] = to_json(diags);
    send_json(res, status, body);
}

std::optional<std::string> param(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return std::nullopt;
    return req.get_param_value(name);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    for (std::string item; std::getline(in, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

double parse_double(const std::string& s, const char* what) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw BadRequest(std::string("invalid ") + what);
    return v;
}

long parse_long(const std::string& s, const char* what) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw BadRequest(std::string("invalid ") + what);
    return v;
}

bool valid_profile_name(const std::string& name) {
    if (name.empty() || name.size() > 100) return false;
    for (char c : name)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return false;
    return true;
}

}  // namespace

struct Service::Impl {
    std::shared_ptr<const Dataset> data;
    ServiceOptions options;
    httplib::Server server;
    std::thread thread;

    mutable std::shared_mutex profiles_mutex;
    std::map<std::string, UserRequirementProfile> profiles;

    Impl(std::shared_ptr<const Dataset> d, ServiceOptions o) : data(std::move(d)), options(std::move(o)) {
        load_profiles();
        const std::size_t workers = options.worker_threads;
        server.new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
        routes();
    }

    void load_profiles() {
        if (!options.profile_dir) return;
        std::error_code ec;
        fs::create_directories(*options.profile_dir, ec);
        if (ec) throw Error(ErrorCode::Io, "cannot create profile directory " + options.profile_dir->string());
        for (const auto& entry : fs::directory_iterator(*options.profile_dir)) {
            if (entry.path().extension() != ".json") continue;
            const std::string name = entry.path().stem().string();
            if (!valid_profile_name(name)) continue;
            auto p = load_profile(entry.path());
            p.name = name;
            profiles[name] = std::move(p);
        }
    }

    UserRequirementProfile profile_named(const std::string& name) const {
        std::shared_lock lock(profiles_mutex);
        auto it = profiles.find(name);
        if (it == profiles.end()) throw Error(ErrorCode::UnknownProfile, "no profile named '" + name + "'");
        return it->second;
    }

    // Wraps a handler with the error-to-status mapping.
    template <class F>
    httplib::Server::Handler guarded(F f) {
        return [f](const httplib::Request& req, httplib::Response& res) {
            try {
                f(req, res);
            } catch (const BadRequest& e) {
                send_error(res, 400, "BadRequest", e.what());
            } catch (const Json::exception& e) {
                send_error(res, 400, "BadRequest", e.what());
            } catch (const DiagnosticError& e) {
                send_error(res, status_for(e.code()), std::string(to_string(e.code())), e.what(), e.diagnostics());
            } catch (const Error& e) {
                send_error(res, status_for(e.code()), std::string(to_string(e.code())), e.what());
            } catch (const std::exception& e) {
                send_error(res, 500, "Internal", e.what());
            }
        };
    }

    RecommendationTask task_from(const UserRequirementProfile& profile, const httplib::Request& req) const {
        std::vector<std::string> exclude;
        std::optional<std::size_t> top;
        double min_score = 0.0;
        if (auto v = param(req, "exclude_existing")) exclude = split_list(*v);
        if (auto v = param(req, "top")) {
            const long n = parse_long(*v, "top");
            if (n < 0) throw BadRequest("top must be non-negative");
            top = static_cast<std::size_t>(n);
        }
        if (auto v = param(req, "min_score")) min_score = parse_double(*v, "min_score");
        auto task = make_task(*data, profile, exclude, top, min_score);
        task.parallelism = options.parallelism;
        return task;
    }

    std::vector<RegionKey> focus_from(const httplib::Request& req) const {
        std::vector<RegionKey> focus;
        if (auto v = param(req, "focus"))
            for (const auto& k : split_list(*v)) focus.push_back(parse_region_key(k));
        for (const auto& k : focus) (void)data->store.hierarchy().at(k);
        return focus;
    }

    int year_from(const httplib::Request& req) const {
        if (auto v = param(req, "year")) return static_cast<int>(parse_long(*v, "year"));
        return data->base_year;
    }

    void routes() {
        server.Get("/api/health", guarded([this](const httplib::Request&, httplib::Response& res) {
            std::shared_lock lock(profiles_mutex);
            send_json(res, 200,
                      {{"status", "ok"},
                       {"sites", data->hierarchy->size()},
                       {"factors", data->store.descriptors().size()},
                       {"chains", data->chains()},
                       {"base_year", data->base_year},
                       {"profiles", profiles.size()}});
        }));

        server.Get("/api/sites", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto& h = *data->hierarchy;
            std::optional<HierarchyLevel> level;
            if (auto v = param(req, "level")) {
                level = parse_level(*v);
                if (!level) throw BadRequest("unknown level '" + *v + "'");
            }
            std::vector<RegionKey> keys;
            if (auto v = param(req, "focus")) {
                const RegionKey focus = parse_region_key(*v);
                const Site& s = h.at(focus);
                keys = h.descendants_at(focus, level.value_or(s.level));
            } else if (level) {
                keys = h.sites_at(*level);
            } else {
                for (const auto& [k, s] : h.sites()) keys.push_back(k);
            }
            Json out = Json::array();
            for (const auto& k : keys) out.push_back(to_json(h.at(k)));
            send_json(res, 200, out);
        }));

        server.Get("/api/factors", guarded([this](const httplib::Request&, httplib::Response& res) {
            Json out = Json::array();
            for (const auto& [id, d] : data->store.descriptors()) out.push_back(to_json(d));
            send_json(res, 200, out);
        }));

        server.Get(R"(/api/factors/([^/]+)/series)",
                   guarded([this](const httplib::Request& req, httplib::Response& res) {
                       const std::string factor = req.matches[1];
                       (void)data->store.descriptor(factor);
                       auto site_text = param(req, "site");
                       if (!site_text) throw BadRequest("missing 'site' parameter");
                       const RegionKey site = parse_region_key(*site_text);
                       (void)data->store.hierarchy().at(site);
                       Json out{{"factor", factor}, {"site", site.raw()}};
                       try {
                           const auto& series = data->store.resolve_series(factor, site);
                           Json j = to_json(series);
                           out["source"] = series.site.raw();
                           out["available"] = true;
                           out["points"] = j["points"];
                       } catch (const Error& e) {
                           if (e.code() != ErrorCode::NoValue) throw;
                           out["source"] = nullptr;
                           out["available"] = false;
                           out["points"] = Json::array();
                       }
                       send_json(res, 200, out);
                   }));

        server.Get("/api/profiles", guarded([this](const httplib::Request&, httplib::Response& res) {
            std::shared_lock lock(profiles_mutex);
            Json out = Json::array();
            for (const auto& [name, p] : profiles) out.push_back(to_json(p));
            send_json(res, 200, out);
        }));

        server.Get(R"(/api/profiles/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, to_json(profile_named(req.matches[1])));
        }));

        server.Put(R"(/api/profiles/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string name = req.matches[1];
            if (!valid_profile_name(name)) throw BadRequest("profile names use letters, digits, '-' and '_'");
            auto profile = profile_from_json(Json::parse(req.body));
            profile.name = name;
            auto diags = validate_profile(profile, data->store);
            if (has_errors(diags)) throw DiagnosticError(ErrorCode::ProfileRejected, diags);

            std::unique_lock lock(profiles_mutex);
            const bool created = !profiles.contains(name);
            if (options.profile_dir) save_profile(profile, *options.profile_dir / (name + ".json"));
            profiles[name] = profile;
            send_json(res, created ? 201 : 200, {{"profile", to_json(profile)}, {"diagnostics", to_json(diags)}});
        }));

        server.Post("/api/recommendations", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const Json body = Json::parse(req.body);
            if (!body.is_object()) throw BadRequest("request body must be a JSON object");
            auto spec = body.find("profile");
            if (spec == body.end()) throw BadRequest("missing 'profile'");
            const UserRequirementProfile profile =
                spec->is_string() ? profile_named(spec->get<std::string>()) : profile_from_json(*spec);

            std::vector<std::string> exclude;
            if (auto it = body.find("exclude_existing"); it != body.end() && !it->is_null()) {
                if (it->is_string()) exclude.push_back(it->get<std::string>());
                else exclude = it->get<std::vector<std::string>>();
            }
            std::optional<std::size_t> top;
            if (auto it = body.find("top"); it != body.end() && !it->is_null()) {
                if (!it->is_number_unsigned()) throw BadRequest("'top' must be a non-negative integer");
                top = it->get<std::size_t>();
            }
            double min_score = 0.0;
            if (auto it = body.find("min_score"); it != body.end() && !it->is_null()) {
                if (!it->is_number()) throw BadRequest("'min_score' must be a number");
                min_score = it->get<double>();
            }
            auto task = make_task(*data, profile, exclude, top, min_score);
            task.parallelism = options.parallelism;
            send_json(res, 200, to_json(recommend(task, data->store)));
        }));

        server.Get("/api/explanations", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto site_text = param(req, "site");
            auto profile_name = param(req, "profile");
            if (!site_text || !profile_name) throw BadRequest("'site' and 'profile' are required");
            const auto task = task_from(profile_named(*profile_name), req);
            const auto run = recommend(task, data->store);
            const auto a = explain_why_not(parse_region_key(*site_text), task, data->store, &run);
            if (auto other = param(req, "compare")) {
                const auto b = explain_why_not(parse_region_key(*other), task, data->store, &run);
                send_json(res, 200, {{"a", to_json(a)}, {"b", to_json(b)}, {"diff", to_json(explain_diff(a, b))}});
                return;
            }
            send_json(res, 200, to_json(a));
        }));

        server.Get("/api/analysis/correlation", guarded([this](const httplib::Request& req, httplib::Response& res) {
            std::vector<std::string> factors;
            if (auto v = param(req, "factors")) factors = split_list(*v);
            else
                for (const auto& [id, d] : data->store.descriptors()) factors.push_back(id);
            const auto sites = analysis_sites(*data, focus_from(req));
            send_json(res, 200,
                      to_json(correlation_matrix(data->store, factors, chain_counts(*data), sites, year_from(req))));
        }));

        server.Get("/api/analysis/buckets", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto factor = param(req, "factor");
            if (!factor) throw BadRequest("missing 'factor' parameter");
            auto sites = analysis_sites(*data, focus_from(req));
            if (auto chain = param(req, "chain")) {
                const auto known = data->chains();
                if (std::find(known.begin(), known.end(), *chain) == known.end())
                    throw Error(ErrorCode::UnknownChain, "no store records for chain '" + *chain + "'");
                const auto with = data->chain_sites(*chain);
                std::erase_if(sites, [&](const RegionKey& k) { return !std::binary_search(with.begin(), with.end(), k); });
            }
            send_json(res, 200, to_json(bucket_means(data->store, sites, *factor, year_from(req))));
        }));

        server.Get("/api/evaluation", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto profile_name = param(req, "profile");
            auto chain = param(req, "chain");
            if (!profile_name || !chain) throw BadRequest("'profile' and 'chain' are required");
            double beta = 2.0;
            if (auto v = param(req, "beta")) beta = parse_double(*v, "beta");
            if (!(beta > 0)) throw BadRequest("beta must be positive");
            send_json(res, 200,
                      to_json(evaluate_chain(*data, profile_named(*profile_name), *chain, beta, options.parallelism)));
        }));
    }
};

Service::Service(std::shared_ptr<const Dataset> data, ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(data), std::move(options))) {}

Service::~Service() { stop(); }

int Service::bind(int port) {
    if (port == 0) return impl_->server.bind_to_any_port(impl_->options.host);
    return impl_->server.bind_to_port(impl_->options.host, port) ? port : -1;
}

bool Service::serve() { return impl_->server.listen_after_bind(); }

int Service::start(int port) {
    const int bound = bind(port);
    if (bound < 0) return bound;
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void Service::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

std::size_t Service::profile_count() const {
    std::shared_lock lock(impl_->profiles_mutex);
    return impl_->profiles.size();
}

}  // namespace quis
