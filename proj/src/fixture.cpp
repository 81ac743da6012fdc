#include "quis/fixture.hpp"

#include "quis/error.hpp"
#include "quis/json_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace quis {

namespace fs = std::filesystem;

const std::vector<ChainPlan>& fixture_chain_plans() {
    // Core-population requirements per chain and the share of existing
    // locations meeting them (74.8 / 88.8 / 94.5 / 87.5 %).
    static const std::vector<ChainPlan> plans{
        {"Edeka", "edeka.json", 5000, 12, 3, 74.8},
        {"E-Center", "ecenter.json", 10000, 9, 1, 88.8},
        {"Lidl", "lidl.json", 5000, 18, 1, 94.5},
        {"NP", "np.json", 2500, 16, 2, 87.5},
    };
    return plans;
}

namespace {

// mt19937_64 output is fully specified by the standard; the std
// distributions are not, so sampling is done by hand.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

private:
    std::mt19937_64 engine_;
};

struct CountySpec {
    int code;
    std::vector<int> municipalities_per_district;
};

struct StateSpec {
    int code;
    const char* name;
    std::vector<CountySpec> counties;
};

const std::vector<StateSpec>& layout() {
    static const std::vector<StateSpec> states{
        {3, "Heideland", {{51, {3, 3, 3}}, {52, {3, 3, 3}}, {54, {3, 3, 5}}}},
        {11, "Spreestadt", {{1, {1}}}},
        {12, "Oderland", {{60, {3, 3, 3}}, {61, {3, 3, 3}}, {63, {3, 3}}, {64, {4, 2}}}},
    };
    return states;
}

std::string pad(int v, int width) {
    std::string s = std::to_string(v);
    return std::string(static_cast<std::size_t>(width) - s.size(), '0') + s;
}

RegionKey key_of(int state, int county, int district, int municipality) {
    return parse_region_key(pad(state, 2) + "0" + pad(county, 2) + pad(district, 4) + pad(municipality, 3));
}

double round_to(double v, double step) { return std::round(v / step) * step; }

std::string fmt(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

class NameMaker {
public:
    explicit NameMaker(Rng& rng) : rng_(rng) {}
    std::string next() {
        static const char* prefixes[] = {"Alt",   "Neu",   "Ober",   "Nieder", "Gross", "Klein", "Wald",
                                         "Berg",  "Lind",  "Eichen", "Rosen",  "Birken", "Hohen", "Wester",
                                         "Oster", "Sonnen", "Stein", "Bruch",  "Heide", "Mark"};
        static const char* suffixes[] = {"dorf",  "feld", "hagen", "burg", "stedt", "hausen", "walde", "berg",
                                         "bruck", "au",   "werder", "ow",  "itz",   "rode",   "heim"};
        while (true) {
            std::string n = std::string(prefixes[rng_.index(std::size(prefixes))]) +
                            suffixes[rng_.index(std::size(suffixes))];
            if (used_.insert(n).second) return n;
        }
    }
    void reserve(const std::string& n) { used_.insert(n); }

private:
    Rng& rng_;
    std::set<std::string> used_;
};

struct Muni {
    RegionKey key;
    std::size_t district = 0;  // index into districts
    std::size_t county = 0;
    std::size_t state = 0;
    bool in_focus = false;
    double population = 0;  // base year
    double growth = 0;
    double household_size = 0;
    double area = 0;
    double employee_share = 0;
};

struct Node {
    RegionKey key;
    std::string name;
    std::vector<std::size_t> munis;
};

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return (sxx > 0 && syy > 0) ? sxy / std::sqrt(sxx * syy) : 0.0;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

UserRequirementProfile chain_profile(const ChainPlan& plan) {
    UserRequirementProfile p;
    p.name = plan.profile_file.substr(0, plan.profile_file.find('.'));
    p.year = kFixtureBaseYear;
    p.target_level = HierarchyLevel::Municipality;
    for (const char* k : kFixtureFocusStates) p.region_focus.push_back(parse_region_key(k));
    RatingStrategy boolean{RatingKind::Boolean, 2.0, Direction::Maximize, OutOfBounds::Clamp};
    auto c = make_criterion("inhabitants", "population", plan.core_population, kUnbounded, boolean, 1.0, true, 1.0);
    c.label = "Core population of at least " + fmt(plan.core_population);
    p.criteria.push_back(std::move(c));
    return p;
}

UserRequirementProfile walkthrough_profile() {
    UserRequirementProfile p;
    p.name = "walkthrough";
    p.year = kFixtureBaseYear;
    p.target_level = HierarchyLevel::Municipality;
    for (const char* k : kFixtureFocusStates) p.region_focus.push_back(parse_region_key(k));

    RatingStrategy boolean{RatingKind::Boolean, 2.0, Direction::Maximize, OutOfBounds::Clamp};
    RatingStrategy linear{RatingKind::Linear, 2.0, Direction::Maximize, OutOfBounds::Clamp};
    RatingStrategy fewer{RatingKind::Linear, 2.0, Direction::Minimize, OutOfBounds::Clamp};
    RatingStrategy squared{RatingKind::Exponential, 2.0, Direction::Maximize, OutOfBounds::Clamp};
    RatingStrategy logarithmic{RatingKind::Logarithmic, 2.0, Direction::Maximize, OutOfBounds::Zero};

    auto inhabitants = make_criterion("inhabitants", "population", 2500, kUnbounded, boolean, 0.0, true, 1.0);
    inhabitants.label = "More than 2,500 inhabitants";
    auto power = make_criterion("purchasing_power", "purchasing_power_index", 80, 110, linear, 3.0);
    power.label = "High purchasing power";
    auto jobs = make_criterion("unemployment", "unemployment_rate", 4, 14, fewer, 2.0);
    jobs.label = "Low unemployment";
    auto income = make_criterion("income", "net_income / 1000", 15, 25, squared, 1.0);
    income.label = "Household net income (kEUR)";
    auto size = make_criterion("market_size", "households * avg_household_size / 1000", 2, 60, logarithmic, 1.0);
    size.label = "Market size (thousand residents)";

    p.criteria = {inhabitants, power, jobs, income, size};
    return p;
}

}  // namespace

DatasetManifest generate_fixture(std::uint64_t seed, const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir / "profiles", ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + out_dir.string() + ": " + ec.message());

    Rng rng(seed);
    NameMaker names(rng);
    names.reserve("Neuhardenberg");

    // ------------------------------------------------------------ hierarchy
    std::vector<Node> states, counties, districts;
    std::vector<Muni> munis;
    std::vector<std::string> muni_names;
    std::set<RegionKey> focus;
    for (const char* k : kFixtureFocusStates) focus.insert(parse_region_key(k));

    for (const auto& st : layout()) {
        const std::size_t si = states.size();
        states.push_back({key_of(st.code, 0, 0, 0), st.name, {}});
        const bool in_focus = focus.contains(states.back().key);
        for (const auto& co : st.counties) {
            const std::size_t ci = counties.size();
            counties.push_back({key_of(st.code, co.code, 0, 0), {}, {}});
            for (std::size_t d = 0; d < co.municipalities_per_district.size(); ++d) {
                const int dcode = 5400 + 10 * static_cast<int>(d + 1);
                const std::size_t di = districts.size();
                districts.push_back({key_of(st.code, co.code, dcode, 0), {}, {}});
                for (int m = 0; m < co.municipalities_per_district[d]; ++m) {
                    Muni mu;
                    mu.key = key_of(st.code, co.code, dcode, 300 + 10 * (m + 1));
                    mu.district = di;
                    mu.county = ci;
                    mu.state = si;
                    mu.in_focus = in_focus;
                    districts[di].munis.push_back(munis.size());
                    counties[ci].munis.push_back(munis.size());
                    states[si].munis.push_back(munis.size());
                    munis.push_back(mu);
                    muni_names.push_back(mu.key.raw() == "120645410340" ? "Neuhardenberg" : names.next());
                }
            }
        }
    }
    // A city-state is one pass-through chain that carries the city's name.
    for (std::size_t i = 0; i < munis.size(); ++i)
        if (states[munis[i].state].munis.size() == 1) muni_names[i] = states[munis[i].state].name;
    for (auto& d : districts) {
        const auto& first = muni_names[d.munis.front()];
        d.name = d.munis.size() == 1 ? first : "Amt " + first;
    }
    for (auto& c : counties) {
        const auto& first = muni_names[c.munis.front()];
        c.name = c.munis.size() == 1 ? first : first + "-Land";
    }

    // ------------------------------------------------------------ sizes
    // Size classes give fixed head-counts above each core-population
    // requirement: 26 focus sites >= 5000, 14 >= 10000, 41 >= 2500.
    enum Size { City, Town, SmallTown, Village, Hamlet };
    std::vector<Size> classes;
    classes.insert(classes.end(), 6, City);
    classes.insert(classes.end(), 8, Town);
    classes.insert(classes.end(), 12, SmallTown);
    classes.insert(classes.end(), 15, Village);
    classes.insert(classes.end(), 18, Hamlet);
    rng.shuffle(classes);

    bool big_city_done = false, hamlet_pinned = false, village_pinned = false;
    std::size_t slot = 0;
    for (auto& m : munis) {
        if (!m.in_focus) {
            m.population = std::round(rng.uniform(320000, 380000));
        } else {
            switch (classes[slot++]) {
            case City:
                m.population = big_city_done ? rng.log_uniform(30000, 95000) : rng.uniform(105000, 150000);
                big_city_done = true;
                break;
            case Town: m.population = rng.log_uniform(10500, 29000); break;
            case SmallTown: m.population = rng.log_uniform(5200, 9800); break;
            case Village:
                m.population = village_pinned ? rng.log_uniform(2600, 4900) : 3000;
                village_pinned = true;
                break;
            case Hamlet:
                m.population = hamlet_pinned ? rng.log_uniform(300, 2400) : 2000;
                hamlet_pinned = true;
                break;
            }
            m.population = std::round(m.population);
        }
        m.growth = rng.uniform(-0.012, 0.008);
        m.household_size = rng.uniform(1.85, 2.35);
        m.area = round_to(rng.uniform(8, 120), 0.1);
        m.employee_share = rng.uniform(0.30, 0.45);
    }

    // Purchasing power rises with the district's settlement size.
    std::vector<double> district_ppi(districts.size());
    for (std::size_t d = 0; d < districts.size(); ++d) {
        double mean = 0;
        for (auto i : districts[d].munis) mean += munis[i].population;
        mean /= static_cast<double>(districts[d].munis.size());
        district_ppi[d] = round_to(80.0 + 8.0 * std::log10(mean / 1000.0) + rng.uniform(-3, 3), 0.1);
    }
    auto ppi_of = [&](std::size_t i) { return district_ppi[munis[i].district]; };

    // ------------------------------------------------------------ stores
    std::vector<std::size_t> focus_munis;
    for (std::size_t i = 0; i < munis.size(); ++i)
        if (munis[i].in_focus) focus_munis.push_back(i);
    std::vector<double> focus_ppis;
    for (auto i : focus_munis) focus_ppis.push_back(ppi_of(i));
    std::sort(focus_ppis.begin(), focus_ppis.end());
    const double median_ppi = focus_ppis[focus_ppis.size() / 2];

    using Order = std::function<bool(std::size_t, std::size_t)>;
    auto pick = [&](bool qualified, double threshold, std::size_t n, const Order& better) {
        std::vector<std::size_t> pool;
        for (auto i : focus_munis)
            if ((munis[i].population >= threshold) == qualified) pool.push_back(i);
        std::sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
            if (better(a, b)) return true;
            if (better(b, a)) return false;
            return munis[a].key < munis[b].key;
        });
        if (pool.size() < n) throw Error(ErrorCode::Io, "fixture layout cannot host the chain plan");
        pool.resize(n);
        return pool;
    };
    const Order larger = [&](std::size_t a, std::size_t b) { return munis[a].population > munis[b].population; };
    const Order richer = [&](std::size_t a, std::size_t b) { return ppi_of(a) > ppi_of(b); };
    const Order poorer = [&](std::size_t a, std::size_t b) { return ppi_of(a) < ppi_of(b); };
    const Order medium = [&](std::size_t a, std::size_t b) {
        return std::abs(ppi_of(a) - median_ppi) < std::abs(ppi_of(b) - median_ppi);
    };
    const std::map<std::string, std::pair<Order, Order>> strategy{
        {"Lidl", {larger, richer}},
        {"E-Center", {richer, larger}},
        {"Edeka", {medium, medium}},
        {"NP", {poorer, poorer}},
    };
    auto store_count = [](const std::string& chain, double pop) {
        if (chain == "Lidl") return std::max(1L, std::lround(pop / 12000.0));
        if (chain == "Edeka") return std::max(1L, std::lround(pop / 20000.0));
        if (chain == "E-Center") return std::max(1L, std::lround(pop / 60000.0));
        return pop >= 8000 ? 2L : 1L;
    };

    std::vector<StoreRecord> stores;
    for (const auto& plan : fixture_chain_plans()) {
        const auto& [ok_order, violation_order] = strategy.at(plan.chain);
        auto sites = pick(true, plan.core_population, plan.locations - plan.violations, ok_order);
        auto viol = pick(false, plan.core_population, plan.violations, violation_order);
        sites.insert(sites.end(), viol.begin(), viol.end());
        for (auto i : sites)
            stores.push_back({plan.chain, munis[i].key, static_cast<int>(store_count(plan.chain, munis[i].population))});
        if (plan.chain != "NP") {
            for (std::size_t i = 0; i < munis.size(); ++i)
                if (!munis[i].in_focus)
                    stores.push_back({plan.chain, munis[i].key,
                                      static_cast<int>(store_count(plan.chain, munis[i].population))});
        }
    }
    std::sort(stores.begin(), stores.end());

    // ------------------------------------------------------------ noise factor
    // Redrawn until it is visibly unrelated to population and store counts.
    std::vector<std::vector<double>> noise(munis.size());
    {
        std::vector<std::vector<double>> targets;
        std::vector<double> pops;
        for (const auto& m : munis) pops.push_back(m.population);
        targets.push_back(pops);
        for (const auto& plan : fixture_chain_plans()) {
            std::vector<double> counts(munis.size(), 0.0);
            for (const auto& r : stores)
                if (r.chain == plan.chain)
                    for (std::size_t i = 0; i < munis.size(); ++i)
                        if (munis[i].key == r.site) counts[i] = r.count;
            targets.push_back(counts);
        }
        auto subset = [&](const std::vector<double>& v) {
            std::vector<double> out;
            for (auto i : focus_munis) out.push_back(v[i]);
            return out;
        };
        for (int attempt = 0;; ++attempt) {
            for (auto& series : noise) {
                series.clear();
                for (int y = 2002; y <= kFixtureBaseYear; ++y) series.push_back(round_to(rng.uniform(0, 100), 0.1));
            }
            std::vector<double> latest;
            for (const auto& s : noise) latest.push_back(s.back());
            bool quiet = true;
            for (const auto& t : targets) {
                quiet = quiet && std::abs(correlation(latest, t)) < 0.15 &&
                        std::abs(correlation(subset(latest), subset(t))) < 0.15;
            }
            if (quiet) break;
            if (attempt > 10000) throw Error(ErrorCode::Io, "could not draw an uncorrelated noise factor");
        }
    }

    // ------------------------------------------------------------ files
    std::ostringstream sites_csv;
    sites_csv << "region_key,name,level,parent_key\n";
    {
        std::map<RegionKey, std::string> rows;
        auto add = [&](const RegionKey& k, const std::string& name) {
            const Site s = make_site(k, name);
            rows[k] = k.raw() + "," + name + "," + std::string(to_string(s.level)) + "," +
                      (s.parent ? s.parent->raw() : "") + "\n";
        };
        for (const auto& s : states) add(s.key, s.name);
        for (const auto& c : counties) add(c.key, c.name);
        for (const auto& d : districts) add(d.key, d.name);
        for (std::size_t i = 0; i < munis.size(); ++i) add(munis[i].key, muni_names[i]);
        // Parents sort before children, so key order is a valid load order.
        for (const auto& [k, line] : rows) sites_csv << line;
    }

    const char* factors_csv =
        "factor_id,name,unit,aggregation\n"
        "population,Population,count,sum\n"
        "households,Households,count,sum\n"
        "area_km2,Area,km2,sum\n"
        "employees,Employees,count,sum\n"
        "population_density,Population density,inhabitants per km2,mean_of_children\n"
        "avg_household_size,Average household size,persons,mean_of_children\n"
        "random_index,Synthetic noise index,index,mean_of_children\n"
        "purchasing_power_index,Purchasing power index,index (national average 100),inherit_down\n"
        "unemployment_rate,Unemployment rate,percent,inherit_down\n"
        "net_income,Average net income per household,EUR,inherit_down\n"
        "gdp_per_inhabitant,GDP per inhabitant,EUR,inherit_down\n"
        "employment_rate,Employment rate,percent,inherit_down\n";

    // factor -> key -> year -> value; std::map keeps the output ordered.
    std::map<std::string, std::map<RegionKey, std::map<int, double>>> series;
    const int first_year = 2000;
    const int first_year_short = 2002;
    for (std::size_t i = 0; i < munis.size(); ++i) {
        const auto& m = munis[i];
        for (int y = first_year; y <= kFixtureBaseYear; ++y) {
            const double pop = std::round(m.population * (1.0 + m.growth * (y - kFixtureBaseYear)));
            const double hh = std::round(pop / m.household_size);
            series["population"][m.key][y] = pop;
            series["households"][m.key][y] = hh;
            series["avg_household_size"][m.key][y] = round_to(pop / hh, 0.01);
            series["area_km2"][m.key][y] = m.area;
            series["population_density"][m.key][y] = round_to(pop / m.area, 0.1);
            if (y >= first_year_short) {
                series["employees"][m.key][y] = std::round(pop * m.employee_share);
                series["random_index"][m.key][y] = noise[i][static_cast<std::size_t>(y - first_year_short)];
            }
        }
    }
    // Pre-aggregated population rows, as statistical offices publish them.
    auto add_population_total = [&](const Node& n) {
        for (int y = first_year; y <= kFixtureBaseYear; ++y) {
            double sum = 0;
            for (auto i : n.munis) sum += series["population"][munis[i].key][y];
            series["population"][n.key][y] = sum;
        }
    };
    for (const auto& n : states) add_population_total(n);
    for (const auto& n : counties) add_population_total(n);
    for (const auto& n : districts) add_population_total(n);

    for (std::size_t d = 0; d < districts.size(); ++d) {
        const double drift = rng.uniform(-0.15, 0.25);
        for (int y = first_year_short; y <= kFixtureBaseYear; ++y)
            series["purchasing_power_index"][districts[d].key][y] =
                round_to(district_ppi[d] - drift * (kFixtureBaseYear - y), 0.1);
    }
    for (const auto& c : counties) {
        double ppi = 0;
        for (auto i : c.munis) ppi += ppi_of(i);
        ppi /= static_cast<double>(c.munis.size());
        const double unemployment = std::clamp(14.0 - 0.35 * (ppi - 80.0) + rng.uniform(-1, 1), 3.0, 18.0);
        const double income = 16000.0 + 450.0 * (ppi - 80.0) + rng.uniform(-800, 800);
        const double gdp = 24000.0 + 900.0 * (ppi - 80.0) + rng.uniform(-2500, 2500);
        for (int y = first_year_short; y <= kFixtureBaseYear; ++y) {
            const double back = kFixtureBaseYear - y;
            series["unemployment_rate"][c.key][y] = round_to(unemployment + 0.2 * back, 0.1);
            series["net_income"][c.key][y] = std::round(income * (1.0 - 0.012 * back));
            series["gdp_per_inhabitant"][c.key][y] = std::round(gdp * (1.0 - 0.015 * back));
        }
    }
    for (const auto& s : states) {
        const double rate = rng.uniform(72, 80);
        for (int y = first_year_short; y <= kFixtureBaseYear; ++y)
            series["employment_rate"][s.key][y] = round_to(rate - 0.25 * (kFixtureBaseYear - y), 0.1);
    }

    std::ostringstream series_csv;
    series_csv << "factor_id,region_key,year,value\n";
    for (const auto& [factor, by_site] : series)
        for (const auto& [key, by_year] : by_site)
            for (const auto& [year, value] : by_year)
                series_csv << factor << ',' << key.raw() << ',' << year << ',' << fmt(value) << '\n';

    std::ostringstream stores_csv;
    stores_csv << "chain,region_key,count\n";
    for (const auto& r : stores) stores_csv << r.chain << ',' << r.site.raw() << ',' << r.count << '\n';

    write_text(out_dir / "sites.csv", sites_csv.str());
    write_text(out_dir / "factors.csv", factors_csv);
    write_text(out_dir / "series.csv", series_csv.str());
    write_text(out_dir / "stores.csv", stores_csv.str());

    for (const auto& plan : fixture_chain_plans())
        write_text(out_dir / "profiles" / plan.profile_file, to_json(chain_profile(plan)).dump(2) + "\n");
    write_text(out_dir / "profiles" / "walkthrough.json", to_json(walkthrough_profile()).dump(2) + "\n");

    DatasetManifest relative{"sites.csv", "factors.csv", "series.csv", fs::path("stores.csv"), kFixtureBaseYear};
    write_manifest(relative, out_dir / "manifest.txt");
    return read_manifest(out_dir / "manifest.txt");
}

}  // namespace quis
