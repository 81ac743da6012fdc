#include "quis/cli.hpp"

#include "quis/evaluation.hpp"
#include "quis/explain.hpp"
#include "quis/fixture.hpp"
#include "quis/json_io.hpp"
#include "quis/service.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <ostream>

namespace quis {

namespace fs = std::filesystem;

namespace {

std::string shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pct(double v) { return fixed(100.0 * v, 2) + "%"; }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<RegionKey> parse_keys(const std::vector<std::string>& raw) {
    std::vector<RegionKey> out;
    for (const auto& k : raw) out.push_back(parse_region_key(k));
    return out;
}

struct Common {
    std::string manifest;
    std::string profile;
    std::vector<std::string> exclude_existing;
    std::optional<std::size_t> top;
    double min_score = 0.0;
    std::size_t threads = 1;
    std::string format;
};

void add_profile_options(CLI::App* cmd, Common& c) {
    cmd->add_option("--manifest", c.manifest, "Dataset manifest")->required();
    cmd->add_option("--profile", c.profile, "User requirement profile (JSON)")->required();
    cmd->add_option("--exclude-existing", c.exclude_existing, "Drop sites where CHAIN already has a store")
        ->type_name("CHAIN");
    cmd->add_option("--top", c.top, "Keep the N best sites");
    cmd->add_option("--min-score", c.min_score, "Minimum total score");
    cmd->add_option("--threads", c.threads, "Evaluation workers")->check(CLI::Range(1, 256));
}

RecommendationTask load_task(const Dataset& data, const Common& c) {
    auto task = make_task(data, load_profile(c.profile), c.exclude_existing, c.top, c.min_score);
    task.parallelism = c.threads;
    return task;
}

void print_recommendations(const RecommendationRun& run, const RecommendationTask& task, const Dataset& data,
                           const std::string& format, std::ostream& out) {
    const auto& h = *data.hierarchy;
    if (format == "json") {
        out << to_json(run).dump(2) << '\n';
        return;
    }
    if (format == "csv") {
        out << "rank,region_key,name,total_score";
        for (const auto& c : task.profile.criteria) out << ',' << csv_field(c.id);
        out << '\n';
        for (const auto& r : run.ranked) {
            out << r.rank << ',' << r.evaluation.site.raw() << ',' << csv_field(h.at(r.evaluation.site).name) << ','
                << shortest(r.evaluation.total_score);
            for (const auto& c : r.evaluation.per_criterion) out << ',' << shortest(c.score);
            out << '\n';
        }
        return;
    }
    std::size_t name_width = 4;
    for (const auto& r : run.ranked) name_width = std::max(name_width, h.at(r.evaluation.site).name.size());
    out << std::left << std::setw(6) << "rank" << std::setw(14) << "region_key" << std::setw(static_cast<int>(name_width + 2))
        << "name" << std::setw(8) << "total";
    for (const auto& c : task.profile.criteria) out << "  " << c.id;
    out << '\n';
    for (const auto& r : run.ranked) {
        out << std::left << std::setw(6) << r.rank << std::setw(14) << r.evaluation.site.raw()
            << std::setw(static_cast<int>(name_width + 2)) << h.at(r.evaluation.site).name << std::setw(8)
            << fixed(r.evaluation.total_score);
        for (std::size_t i = 0; i < r.evaluation.per_criterion.size(); ++i)
            out << "  " << std::setw(static_cast<int>(task.profile.criteria[i].id.size()))
                << fixed(r.evaluation.per_criterion[i].score);
        out << '\n';
    }
    out << std::right;
    out << "# " << run.ranked.size() << " of " << run.candidates << " candidates; eliminated " << run.eliminated
        << ", below cutoff " << run.below_cutoff << ", excluded " << run.excluded << ", truncated " << run.truncated
        << '\n';
}

void print_evaluation(const ChainEvaluation& e, std::ostream& out) {
    const auto& m = e.confusion;
    out << "profile " << e.profile << ", chain " << e.chain << '\n';
    out << "universe " << e.universe << ", recommended " << e.recommended << '\n';
    out << "confusion: tp " << m.tp << ", fn " << m.fn << ", fp " << m.fp << ", tn " << m.tn << '\n';
    out << "recall " << pct(e.metrics.recall) << ", precision " << pct(e.metrics.precision) << ", F"
        << shortest(e.metrics.beta) << " " << pct(e.metrics.f_beta) << (e.metrics.degenerate ? " (degenerate)" : "")
        << '\n';
    out << "coverage " << e.coverage.recommended_among_existing << " of " << e.coverage.existing << " locations ("
        << fixed(e.coverage.percentage, 2) << "%)\n";
    out << "recommended sites without existing markets " << e.without_markets.size() << '\n';
}

int env_port() {
    if (const char* v = std::getenv("QUIS_PORT")) {
        int port = 0;
        auto [ptr, ec] = std::from_chars(v, v + std::char_traits<char>::length(v), port);
        if (ec == std::errc{} && *ptr == '\0' && port > 0 && port < 65536) return port;
    }
    return 8080;
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Site selection engine: recommendations, evaluation, analysis and explanations"};
    app.name("quis");
    app.require_subcommand(1);

    // ingest
    std::string ingest_manifest;
    auto* ingest = app.add_subcommand("ingest", "Load a dataset and report what it contains");
    ingest->add_option("manifest", ingest_manifest, "Dataset manifest")->required();

    // fixture
    std::uint64_t seed = 1;
    std::string fixture_out;
    auto* fixture = app.add_subcommand("fixture", "Write the synthetic dataset");
    fixture->add_option("--seed", seed, "Generator seed");
    fixture->add_option("--out", fixture_out, "Output directory")->required();

    // recommend / evaluate / explain
    Common rec;
    rec.format = "table";
    auto* recommend_cmd = app.add_subcommand("recommend", "Rank candidate sites for a profile");
    add_profile_options(recommend_cmd, rec);
    recommend_cmd->add_option("--format", rec.format)->check(CLI::IsMember({"table", "csv", "json"}));

    Common ev;
    ev.format = "text";
    std::string chain;
    double beta = 2.0;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Compare recommendations with a chain's locations");
    evaluate_cmd->add_option("--manifest", ev.manifest, "Dataset manifest")->required();
    evaluate_cmd->add_option("--profile", ev.profile, "User requirement profile (JSON)")->required();
    evaluate_cmd->add_option("--chain", chain, "Chain name in the store records")->required();
    evaluate_cmd->add_option("--beta", beta, "F-measure beta")->check(CLI::PositiveNumber);
    evaluate_cmd->add_option("--threads", ev.threads, "Evaluation workers")->check(CLI::Range(1, 256));
    evaluate_cmd->add_option("--format", ev.format)->check(CLI::IsMember({"text", "json"}));

    Common ex;
    ex.format = "text";
    std::string site;
    std::string compare;
    auto* explain_cmd = app.add_subcommand("explain", "Explain why a site is or is not recommended");
    add_profile_options(explain_cmd, ex);
    explain_cmd->add_option("--site", site, "Region key")->required();
    explain_cmd->add_option("--compare", compare, "Second region key for a side-by-side comparison");
    explain_cmd->add_option("--format", ex.format)->check(CLI::IsMember({"text", "json"}));

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Location factor statistics");
    analyze->require_subcommand(1);
    std::string an_manifest;
    std::vector<std::string> an_focus;
    std::optional<int> an_year;
    std::string an_format = "csv";
    auto analysis_options = [&](CLI::App* cmd) {
        cmd->add_option("--manifest", an_manifest, "Dataset manifest")->required();
        cmd->add_option("--focus", an_focus, "Restrict to municipalities under these region keys");
        cmd->add_option("--year", an_year, "Year (default: the dataset's base year)");
    };
    std::vector<std::string> factors;
    auto* correlate = analyze->add_subcommand("correlate", "Correlate factors with store counts per chain");
    analysis_options(correlate);
    correlate->add_option("--factors", factors, "Factor ids (default: all)")->delimiter(',');
    correlate->add_option("--format", an_format)->check(CLI::IsMember({"csv", "json"}));

    std::string bucket_factor;
    std::vector<std::string> bucket_chains;
    auto* buckets = analyze->add_subcommand("buckets", "Mean factor value per population range");
    analysis_options(buckets);
    buckets->add_option("--factor", bucket_factor, "Factor id")->required();
    buckets->add_option("--chain", bucket_chains, "Also report the sites of these chains")->delimiter(',');
    buckets->add_option("--format", an_format)->check(CLI::IsMember({"csv", "json"}));

    std::string w_factor, chain_a, chain_b, w_method = "auto";
    auto* wilcoxon = analyze->add_subcommand("wilcoxon", "Rank-sum test of a factor between two chains' sites");
    analysis_options(wilcoxon);
    wilcoxon->add_option("--factor", w_factor, "Factor id")->required();
    wilcoxon->add_option("--chain-a", chain_a, "First chain")->required();
    wilcoxon->add_option("--chain-b", chain_b, "Second chain")->required();
    wilcoxon->add_option("--method", w_method)->check(CLI::IsMember({"auto", "exact", "normal"}));
    wilcoxon->add_option("--format", an_format)->check(CLI::IsMember({"csv", "json"}));

    // serve
    std::string serve_manifest;
    int port = env_port();
    std::string profile_dir;
    if (const char* v = std::getenv("QUIS_PROFILE_DIR")) profile_dir = v;
    std::string host = "127.0.0.1";
    std::size_t serve_threads = 1;
    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    serve->add_option("--manifest", serve_manifest, "Dataset manifest")->required();
    serve->add_option("--port", port, "Port (default: QUIS_PORT or 8080)")->check(CLI::Range(1, 65535));
    serve->add_option("--profile-dir", profile_dir, "Profile directory (default: QUIS_PROFILE_DIR)");
    serve->add_option("--host", host, "Listen address");
    serve->add_option("--threads", serve_threads, "Evaluation workers per request")->check(CLI::Range(1, 256));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    }

    try {
        if (*ingest) {
            const auto data = load_dataset(fs::path(ingest_manifest));
            const auto& h = *data.hierarchy;
            out << "sites " << h.size() << " (state " << h.count(HierarchyLevel::State) << ", county "
                << h.count(HierarchyLevel::County) << ", district " << h.count(HierarchyLevel::District)
                << ", municipality " << h.count(HierarchyLevel::Municipality) << ")\n";
            out << "factors " << data.report.factors << ", series " << data.report.series << " ("
                << data.report.series_rows << " rows)\n";
            out << "store records " << data.report.store_records << ", chains " << data.chains().size() << '\n';
            out << "base year " << data.base_year << '\n';
            for (const auto& d : data.store.validate()) err << format_diagnostic(d) << '\n';
            return 0;
        }
        if (*fixture) {
            generate_fixture(seed, fixture_out);
            out << "wrote fixture (seed " << seed << ") to " << fixture_out << '\n';
            return 0;
        }
        if (*recommend_cmd) {
            const auto data = load_dataset(fs::path(rec.manifest));
            const auto task = load_task(data, rec);
            for (const auto& d : validate_profile(task.profile, data.store))
                if (d.severity == Severity::Warning) err << format_diagnostic(d) << '\n';
            const auto run = recommend(task, data.store);
            print_recommendations(run, task, data, rec.format, out);
            return 0;
        }
        if (*evaluate_cmd) {
            const auto data = load_dataset(fs::path(ev.manifest));
            const auto e = evaluate_chain(data, load_profile(ev.profile), chain, beta, ev.threads);
            if (ev.format == "json") out << to_json(e).dump(2) << '\n';
            else print_evaluation(e, out);
            return 0;
        }
        if (*explain_cmd) {
            const auto data = load_dataset(fs::path(ex.manifest));
            const auto task = load_task(data, ex);
            const auto run = recommend(task, data.store);
            const auto a = explain_why_not(parse_region_key(site), task, data.store, &run);
            if (compare.empty()) {
                if (ex.format == "json") out << to_json(a).dump(2) << '\n';
                else out << render_text(a);
                return 0;
            }
            const auto b = explain_why_not(parse_region_key(compare), task, data.store, &run);
            const auto d = explain_diff(a, b);
            if (ex.format == "json") {
                out << Json{{"a", to_json(a)}, {"b", to_json(b)}, {"diff", to_json(d)}}.dump(2) << '\n';
            } else {
                out << render_text(a) << '\n' << render_text(b) << '\n' << render_text(d);
            }
            return 0;
        }
        if (*analyze) {
            const auto data = load_dataset(fs::path(an_manifest));
            const int year = an_year.value_or(data.base_year);
            const auto focus = parse_keys(an_focus);
            for (const auto& k : focus) (void)data.hierarchy->at(k);
            const auto sites = analysis_sites(data, focus);
            if (*correlate) {
                if (factors.empty())
                    for (const auto& [id, d] : data.store.descriptors()) factors.push_back(id);
                const auto m = correlation_matrix(data.store, factors, chain_counts(data), sites, year);
                if (an_format == "json") {
                    out << to_json(m).dump(2) << '\n';
                } else {
                    out << "factor";
                    for (const auto& c : m.cols) out << ',' << csv_field(c);
                    out << '\n';
                    for (std::size_t i = 0; i < m.rows.size(); ++i) {
                        out << csv_field(m.rows[i]);
                        for (const auto& v : m.r[i]) out << ',' << (v ? fixed(*v, 6) : "");
                        out << '\n';
                    }
                }
                for (const auto& k : m.dropped_sites) err << "dropped " << k.raw() << " (missing factor value)\n";
                return 0;
            }
            if (*buckets) {
                std::vector<std::pair<std::string, BucketReport>> groups;
                groups.emplace_back("all", bucket_means(data.store, sites, bucket_factor, year));
                for (const auto& c : bucket_chains) {
                    const auto known = data.chains();
                    if (std::find(known.begin(), known.end(), c) == known.end())
                        throw Error(ErrorCode::UnknownChain, "no store records for chain '" + c + "'");
                    const auto with = data.chain_sites(c);
                    std::vector<RegionKey> subset;
                    for (const auto& k : sites)
                        if (std::binary_search(with.begin(), with.end(), k)) subset.push_back(k);
                    groups.emplace_back(c, bucket_means(data.store, subset, bucket_factor, year));
                }
                if (an_format == "json") {
                    Json doc = Json::object();
                    for (const auto& [name, rep] : groups) doc[name] = to_json(rep);
                    out << doc.dump(2) << '\n';
                } else {
                    out << "group,bucket,sites,mean\n";
                    for (const auto& [name, rep] : groups) {
                        for (const auto& b : rep.buckets)
                            out << csv_field(name) << ',' << csv_field(b.label) << ',' << b.sites.size() << ','
                                << (b.mean_factor_value ? shortest(*b.mean_factor_value) : "") << '\n';
                        out << csv_field(name) << ",above 100.000," << rep.above_range.size() << ",\n";
                    }
                }
                return 0;
            }
            if (*wilcoxon) {
                (void)data.store.descriptor(w_factor);
                auto sample = [&](const std::string& c) {
                    const auto known = data.chains();
                    if (std::find(known.begin(), known.end(), c) == known.end())
                        throw Error(ErrorCode::UnknownChain, "no store records for chain '" + c + "'");
                    const auto with = data.chain_sites(c);
                    std::vector<double> v;
                    for (const auto& k : sites) {
                        if (!std::binary_search(with.begin(), with.end(), k)) continue;
                        try {
                            v.push_back(data.store.value(w_factor, k, year));
                        } catch (const Error&) {
                            err << "dropped " << k.raw() << " (missing factor value)\n";
                        }
                    }
                    return v;
                };
                const auto method = w_method == "exact"    ? WilcoxonMethod::Exact
                                    : w_method == "normal" ? WilcoxonMethod::Normal
                                                           : WilcoxonMethod::Auto;
                const auto xa = sample(chain_a);
                const auto xb = sample(chain_b);
                const auto r = wilcoxon_rank_sum(xa, xb, method);
                if (an_format == "json") {
                    Json doc = to_json(r);
                    doc["n_a"] = xa.size();
                    doc["n_b"] = xb.size();
                    out << doc.dump(2) << '\n';
                } else {
                    out << "chain_a,chain_b,n_a,n_b,w,u,z,p_value,method\n"
                        << csv_field(chain_a) << ',' << csv_field(chain_b) << ',' << xa.size() << ',' << xb.size()
                        << ',' << shortest(r.w) << ',' << shortest(r.u) << ',' << fixed(r.z, 6) << ','
                        << shortest(r.p_value) << ',' << to_string(r.method) << '\n';
                }
                return 0;
            }
        }
        if (*serve) {
            auto data = std::make_shared<const Dataset>(load_dataset(fs::path(serve_manifest)));
            ServiceOptions options;
            if (!profile_dir.empty()) options.profile_dir = profile_dir;
            options.host = host;
            options.parallelism = serve_threads;
            Service service(data, options);
            if (service.bind(port) < 0) {
                err << "cannot bind " << host << ':' << port << '\n';
                return 2;
            }
            out << "listening on http://" << host << ':' << port << " (" << service.profile_count()
                << " profiles)" << std::endl;
            service.serve();
            return 0;
        }
    } catch (const DiagnosticError& e) {
        err << e.what() << '\n';
        for (const auto& d : e.diagnostics()) err << "  " << format_diagnostic(d) << '\n';
        return 2;
    } catch (const Error& e) {
        err << e.what() << '\n';
        return e.code() == ErrorCode::Usage ? 1 : 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace quis
