// nsft: command-line front end. One subcommand per library operation; every run writes its
// artifacts plus a manifest into --out, and `replay` re-executes a manifest and compares hashes.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nsft/bounds.hpp"
#include "nsft/compiler.hpp"
#include "nsft/measure.hpp"
#include "nsft/metrics.hpp"
#include "nsft/noise.hpp"
#include "nsft/render.hpp"
#include "nsft/robinson.hpp"
#include "nsft/sft.hpp"
#include "nsft/tm.hpp"

namespace fs = std::filesystem;
using namespace nsft;
namespace rb = nsft::robinson;
namespace cc = nsft::compiler;

namespace {

constexpr const char* TOOL_VERSION = "nsft 1.0.0";
enum Exit { EXIT_OK = 0, EXIT_INTERNAL = 1, EXIT_INPUT = 2, EXIT_BUDGET = 3, EXIT_INCONSISTENT = 4 };

std::string sha256(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw input_error("cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

template <class F>
std::string text(F&& f) {
    std::ostringstream os;
    f(os);
    return os.str();
}

std::string utc_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

double parse_real(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used == s.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw input_error(std::string("bad ") + what + " '" + s + "'");
}

Q rational(const std::string& s, const char* what) {
    try {
        return parse_q(s);
    } catch (const std::exception&) {
        throw input_error(std::string("bad ") + what + " '" + s + "'");
    }
}

char colour_letter(const std::string& s, const char* what) {
    if (s.size() != 1) throw input_error(std::string("bad ") + what + " '" + s + "'");
    return s[0];
}

// Files written by one run, staged away from the target directory until the run succeeds.
struct Run {
    std::string command;
    fs::path stage;
    std::vector<std::string> outputs;
    std::vector<std::pair<std::string, std::string>> inputs;
    std::vector<std::string> report;  // stdout summary

    void write(const std::string& rel, const std::string& data) {
        fs::path p = stage / rel;
        fs::create_directories(p.parent_path());
        std::ofstream os(p, std::ios::binary);
        os.write(data.data(), std::streamsize(data.size()));
        if (!os) throw std::runtime_error("cannot write " + p.string());
        outputs.push_back(rel);
    }
    std::string read(const fs::path& p) {
        auto data = slurp(p);
        inputs.push_back({fs::absolute(p).lexically_normal().string(), sha256(data)});
        return data;
    }
    void say(const std::string& s) { report.push_back(s); }
};

struct Param {
    std::string name;
    std::function<std::string()> value;
    bool flag = false;
};

struct Command {
    CLI::App* app = nullptr;
    std::vector<Param> params;
    std::function<void(Run&)> body;
};

template <class T>
void opt(Command& c, const std::string& name, T& v, const std::string& help) {
    c.app->add_option("--" + name, v, help)->capture_default_str();
    c.params.push_back({name, [&v] {
                            if constexpr (std::is_same_v<T, std::string>) return v;
                            else return std::to_string(v);
                        }});
}

// Paths are recorded absolute so that a manifest replays from any directory.
void path_opt(Command& c, const std::string& name, std::string& v, const std::string& help, bool required = false) {
    auto* o = c.app->add_option("--" + name, v, help);
    if (required) o->required();
    c.params.push_back({name, [&v] { return v.empty() ? v : fs::absolute(v).lexically_normal().string(); }});
}

void flag(Command& c, const std::string& name, bool& v, const std::string& help) {
    c.app->add_flag("--" + name, v, help);
    c.params.push_back({name, [&v] { return std::string(v ? "true" : "false"); }, true});
}

// ---------------------------------------------------------------------------
// Shared helpers

Configuration load_config(Run& run, const std::string& path) {
    std::istringstream is(run.read(path));
    return io::read_config(is);
}

void write_census(std::ostream& os, const Configuration& c, const rb::Tileset& ts) {
    auto cs = rb::census(c, ts);
    auto bad = check_local_admissibility(c, ts.forbidden);
    os << "side " << cs.size_side << "\nviolations " << bad.size() << "\nbumpy_total " << cs.bumpy_total << "\n";
    for (auto& [col, n] : cs.bumpy_count) os << "bumpy " << (col ? col : '-') << ' ' << n << "\n";
    os << "red_squares " << cs.red_square_sides.size() << "\n";
    std::map<int, int> hist;
    for (int s : cs.red_square_sides) ++hist[s];
    for (auto& [s, n] : hist) os << "red_square_side " << s << ' ' << n << "\n";
    os << "largest_red_square " << (cs.red_square_sides.empty() ? 0 : cs.red_square_sides.back()) << "\n";
    os << "outside_red " << cs.outside_red_count << "\n";
}

tm::TuringMachine load_machine(Run& run, const std::string& spec) {
    if (spec.rfind("sample:", 0) == 0) return tm::sample_machine(spec.substr(7));
    return tm::parse_machine(run.read(spec));
}

std::string pattern_text(const Pattern& p) {
    std::string s;
    for (int y = 0; y < p.height(); ++y) {
        if (y) s += '/';
        for (int x = 0; x < p.width(); ++x) s += p.alphabet->name(p.at(x, y));
    }
    return s;
}

const rb::Tileset* detect_structure(const Configuration& c) {
    const auto& l0 = c.alphabet->layer(0).symbols;
    for (auto s : {rb::Structure::vanilla, rb::Structure::red_black, rb::Structure::enhanced,
                   rb::Structure::two_channel, rb::Structure::three_channel}) {
        const auto& ts = rb::structure_tileset(s);
        if (ts.alphabet->layer(0).symbols == l0) return &ts;
    }
    return nullptr;
}

Configuration layer0(const Configuration& c, const rb::Tileset& ts) {
    if (c.alphabet->layer_count() == 1) return c;
    Configuration out(c.width, c.height, ts.alphabet, c.boundary);
    for (std::size_t i = 0; i < c.cells.size(); ++i) out.cells[i] = c.alphabet->component(c.cells[i], 0);
    return out;
}

// ---------------------------------------------------------------------------

struct Options {
    // shared
    std::string out;
    int threads = 1;
    std::string variant = "red_black";
    int scale = 3;
    std::string orient = "NE";
    std::string base = "K";
    int transition_level = 0;
    std::string transition_colour = "U";
    std::string eps = "0.4";
    std::uint64_t seed = 1;
    std::string in;
    unsigned long long budget = 1ULL << 20;
    // sample-noise
    int width = 0, height = 0;
    // flip
    int trials = 100;
    int start_scale = 2;
    int max_scale = 0;
    // dist
    std::string mode = "bumpy";
    std::string u, v;
    int q = 2;
    std::string bernoulli;
    int rank = 12;
    std::string r = "1";
    std::string method = "shift-exact";
    int lp_scale = 1;
    std::string config_a, config_b;
    // cover / witness
    std::string delta = "1/2";
    int dim = 1;
    int forbidden_k = 0;
    std::string sft = "full";
    std::string rho = "1/4";
    int enum_scale = -1;
    std::string gamma = "1/8";
    std::string weps = "1/4";
    int noisy_scale = 1, ref_scale = 1, pair_scale = 1;
    int witness_rank = 10;
    // compiler
    std::string tm_variant = "p1";
    std::string machine = "sample:busy_beaver3";
    unsigned long long alphabet_budget = cc::DEFAULT_ALPHABET_BUDGET;
    int tm_max_scale = 4;
    std::string input;
    int emit_scale = 0;
    bool transition = false;
    std::string red_aux;
    // bounds
    std::string what = "rate";
    std::string alpha = "4", beta = "1/2";
    std::string beps = "1/1000";
    long K = 1, kmax = 65;
    std::string construction = "p1";
    // render
    int cell = 5;
    std::string noise_file, fliplog_file, patches_file;
    bool red_squares = false;
    std::string format = "ppm";
    // replay
    std::string manifest;
};

void add_common(Command& c, Options& o) {
    c.app->add_option("--out", o.out, "output directory")->required();
    c.app->add_option("--threads", o.threads, "worker cap")->capture_default_str()->check(CLI::PositiveNumber);
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_gen_tileset(Run& run, Options& o) {
    const auto& ts = rb::build_tileset(rb::parse_variant(o.variant));
    run.write("tileset.txt", text([&](std::ostream& os) { io::write_forbidden(os, ts.forbidden); }));
    run.write("tiles.csv", text([&](std::ostream& os) {
        os << "symbol,name,family,bumpy,main,aux,red_side,transition\n";
        for (std::size_t i = 0; i < ts.info.size(); ++i) {
            const auto& in = ts.info[i];
            auto ch = [](char c) { return c ? c : '-'; };
            os << i << ',' << ts.alphabet->name(Sym(i)) << ',' << in.family << ',' << in.tile.bumpy << ','
               << ch(in.line.main) << ',' << ch(in.line.aux) << ',' << in.red_side << ',' << in.transition << "\n";
        }
    }));
    std::map<std::string, std::size_t> fam;
    for (auto& r : ts.forbidden.rules) ++fam[r.family];
    run.write("summary.txt", text([&](std::ostream& os) {
        os << "variant " << ts.tag << "\ntiles " << ts.info.size() << "\nbase_tiles " << ts.base_tiles << "\nrules "
           << ts.forbidden.rules.size() << "\n";
        for (auto& [f, n] : fam) os << "rule_family " << f << ' ' << n << "\n";
    }));
    run.say("tiles " + std::to_string(ts.info.size()));
}

void cmd_gen_macro(Run& run, Options& o) {
    rb::MacroTileSpec spec;
    spec.variant = rb::parse_variant(o.variant);
    spec.scale = o.scale;
    spec.orientation = rb::parse_orientation(o.orient);
    spec.colours.base = colour_letter(o.base, "base colour");
    spec.colours.transition_level = o.transition_level;
    spec.colours.transition_colour = colour_letter(o.transition_colour, "transition colour");
    auto c = rb::build_macro_tile(spec);
    const auto& ts = rb::build_tileset(spec.variant);
    if (!check_local_admissibility(c, ts.forbidden).empty())
        throw inconsistency_error("macro-tile is not locally admissible");
    run.write("macro.cfg", text([&](std::ostream& os) { io::write_config(os, c); }));
    run.write("census.txt", text([&](std::ostream& os) {
        os << "variant " << ts.tag << "\nscale " << o.scale << "\norientation " << o.orient << "\n";
        write_census(os, c, ts);
    }));
    run.say("side " + std::to_string(c.width));
}

void cmd_sample_noise(Run& run, Options& o) {
    double eps = parse_real(o.eps, "epsilon");
    require(eps >= 0 && eps <= 1, "epsilon must lie in [0,1]");
    int w = o.width, h = o.height;
    if (!w && !h) {
        require(o.scale >= 1 && o.scale <= rb::MAX_MACRO_SCALE, "scale out of range");
        w = h = (1 << o.scale) - 1;
    }
    require(w >= 1 && h >= 1, "noise field needs a positive size");
    auto f = sample_noise(w, h, eps, o.seed);
    run.write("noise.txt", text([&](std::ostream& os) { io::write_noise(os, f); }));
    run.say("popcount " + std::to_string(f.popcount()));
}

void cmd_flip(Run& run, Options& o) {
    double eps = parse_real(o.eps, "epsilon");
    require(eps >= 0 && eps <= 1, "epsilon must lie in [0,1]");
    require(o.trials >= 1, "need at least one trial");
    rb::MacroTileSpec spec;
    spec.variant = rb::parse_variant(o.variant);
    spec.scale = o.scale;
    spec.orientation = rb::parse_orientation(o.orient);
    spec.colours.base = colour_letter(o.base, "base colour");
    const auto& ts = rb::build_tileset(spec.variant);
    auto ref = rb::build_macro_tile(spec);
    const int top = o.max_scale ? o.max_scale : o.scale;
    run.write("reference.cfg", text([&](std::ostream& os) { io::write_config(os, ref); }));
    FlipLog all;
    std::ostringstream trials;
    trials << "trial,seed,noise_popcount,flippable,flipped\n";
    for (int t = 0; t < o.trials; ++t) {
        std::uint64_t s = o.seed + std::uint64_t(t);
        auto noise = sample_noise(ref.width, ref.height, eps, s);
        auto res = flip_process(ref, ts, noise, top, o.start_scale, s);
        long fl = 0, fd = 0;
        for (auto& e : res.log.events) fl += e.flippable, fd += e.flipped;
        all.events.insert(all.events.end(), res.log.events.begin(), res.log.events.end());
        char tag[32];
        std::snprintf(tag, sizeof tag, "trials/%04d", t);
        run.write(std::string(tag) + ".cfg", text([&](std::ostream& os) { io::write_config(os, res.config); }));
        run.write(std::string(tag) + ".noise", text([&](std::ostream& os) { io::write_noise(os, noise); }));
        run.write(std::string(tag) + ".fliplog", text([&](std::ostream& os) { io::write_fliplog(os, res.log); }));
        trials << t << ',' << s << ',' << noise.popcount() << ',' << fl << ',' << fd << "\n";
    }
    run.write("trials.csv", trials.str());
    run.write("flip_stats.csv", text([&](std::ostream& os) {
        os << "scale,tiles,flippable,flipped,flippable_rate,flip_rate,z_flippable,z_flip\n";
        for (auto& s : flip_statistics(all, eps))
            os << s.scale << ',' << s.tiles << ',' << s.flippable << ',' << s.flipped << ',' << fmt(s.flippable_rate)
               << ',' << fmt(s.flip_rate) << ',' << (s.z_flippable ? fmt(*s.z_flippable) : "") << ','
               << (s.z_flip ? fmt(*s.z_flip) : "") << "\n";
    }));
    run.say("trials " + std::to_string(o.trials));
}

void dist_bumpy(Run& run, Options& o) {
    require(!o.in.empty(), "--in must name a flip output directory");
    const auto& ts = rb::build_tileset(rb::parse_variant(o.variant));
    auto ref = load_config(run, (fs::path(o.in) / "reference.cfg").string());
    std::vector<fs::path> files;
    for (auto& e : fs::directory_iterator(fs::path(o.in) / "trials"))
        if (e.path().extension() == ".cfg") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    require(!files.empty(), "no trials found in " + o.in);
    std::ostringstream rows;
    rows << "trial,mismatch,density\n";
    std::vector<double> d;
    Q sum = 0;
    double eps = -1;
    for (auto& f : files) {
        auto c = load_config(run, f.string());
        std::istringstream ns(run.read(fs::path(f).replace_extension(".noise")));
        double e = io::read_noise(ns).epsilon;
        require(eps < 0 || e == eps, "trials mix noise levels");
        eps = e;
        Q m = bumpy_mismatch_density(c, ref, ts);
        sum += m;
        d.push_back(m.get_d());
        rows << f.stem().string() << ',' << m.get_str() << ',' << fmt(m.get_d()) << "\n";
    }
    const double n = double(d.size());
    Q mean = sum / Q(long(d.size()));
    double var = 0;
    for (double x : d) var += (x - mean.get_d()) * (x - mean.get_d());
    double se = d.size() > 1 ? std::sqrt(var / (n - 1) / n) : 0;
    double predicted = (1 - std::pow(1 - eps * eps, 4)) / 8;
    run.write("dist.csv", rows.str());
    run.write("dist_summary.csv", text([&](std::ostream& os) {
        os << "trials,mean,stderr,eps,predicted,mean_ge_predicted_minus_3se\n";
        os << d.size() << ',' << fmt(mean.get_d()) << ',' << fmt(se) << ',' << fmt(eps) << ',' << fmt(predicted) << ','
           << (mean.get_d() >= predicted - 3 * se ? "yes" : "no") << "\n";
    }));
    run.say("mean " + fmt(mean.get_d()) + " stderr " + fmt(se) + " predicted " + fmt(predicted));
}

void cmd_dist(Run& run, Options& o) {
    if (o.mode == "bumpy") return dist_bumpy(run, o);
    std::ostringstream os;
    auto A = Alphabet::digits(o.q);
    if (o.mode == "alignment") {
        auto a = load_config(run, o.config_a), b = load_config(run, o.config_b);
        auto al = best_alignment_distance(a, b, o.budget);
        os << "mode,distance,shift_x,shift_y\nalignment," << al.distance.get_str() << ',' << al.shift.k[0] << ','
           << (al.shift.k.size() > 1 ? al.shift.k[1] : 0) << "\n";
    } else {
        require(!o.u.empty(), "--u is required");
        auto wu = word(o.u, A);
        if (o.mode == "dplus") {
            Measure mu = PeriodicMeasure{wu};
            Measure nu = o.bernoulli.empty() ? Measure(PeriodicMeasure{word(o.v, A)})
                                             : Measure(BernoulliProduct{rational(o.bernoulli, "Bernoulli parameter"), 1, A});
            require(!o.bernoulli.empty() || !o.v.empty(), "--v or --bernoulli is required");
            require(o.bernoulli.empty() || o.q == 2, "Bernoulli measures are binary");
            auto iv = dplus_truncated(mu, nu, rational(o.r, "normalisation"), o.rank);
            os << "mode,rank,lo,hi,lo_decimal,hi_decimal\ndplus," << o.rank << ',' << iv.lo.get_str() << ','
               << iv.hi.get_str() << ',' << fmt(iv.lo.get_d()) << ',' << fmt(iv.hi.get_d()) << "\n";
        } else {
            require(!o.v.empty(), "--v is required");
            auto wv = word(o.v, A);
            Q val;
            if (o.mode == "hamming") val = hamming_distance(wu, wv).distance;
            else if (o.mode == "besicovitch") val = besicovitch_periodic(wu, wv, o.budget);
            else if (o.mode == "coupling") {
                CouplingMethod m;
                if (o.method == "shift-exact") m = CouplingMethod::shift_exact;
                else if (o.method == "window-lp") m = CouplingMethod::window_lp;
                else throw input_error("unknown coupling method '" + o.method + "'");
                val = coupling_delta_min(wu, wv, m, o.lp_scale);
            } else
                throw input_error("unknown mode '" + o.mode + "'");
            os << "mode,value,decimal\n" << o.mode << ',' << val.get_str() << ',' << fmt(val.get_d()) << "\n";
        }
    }
    run.write("dist.csv", os.str());
    run.say(os.str().substr(os.str().find('\n') + 1));
}

void cmd_census(Run& run, Options& o) {
    require(!o.in.empty(), "--in is required");
    auto c = load_config(run, o.in);
    const auto* ts = detect_structure(c);
    if (!ts) throw input_error("configuration alphabet is not a Robinson tileset");
    auto s = layer0(c, *ts);
    run.write("census.txt", text([&](std::ostream& os) {
        os << "variant " << ts->tag << "\n";
        write_census(os, s, *ts);
    }));
    run.say("structure " + ts->tag);
}

void cmd_cover(Run& run, Options& o) {
    Q delta = rational(o.delta, "radius");
    auto p = covering_params(delta, o.q, o.dim, o.forbidden_k, o.budget);
    auto big = [](const std::optional<Z>& z) {
        if (!z) return std::string("unrepresentable");
        if (mpz_sizeinbase(z->get_mpz_t(), 2) > 256) return "2^" + std::to_string(mpz_sizeinbase(z->get_mpz_t(), 2) - 1) + "+";
        return z->get_str();
    };
    std::ostringstream os;
    os << "delta " << p.radius.get_str() << "\nalphabet " << p.alphabet << "\ndim " << p.dim << "\nforbidden_k "
       << p.forbidden_k << "\nn_radius " << p.n_radius << "\nm " << p.m.get_str() << "\nk " << p.k.get_str()
       << "\npsi_bits " << p.psi_bits.get_str() << "\npsi " << big(p.psi) << "\nphi " << big(p.phi)
       << "\nenumerable " << (p.enumerable ? "yes" : "no") << "\n";
    if (o.enum_scale >= 0) {
        auto F = named_sft(o.sft, o.dim);
        require(long(F.alphabet->size()) == o.q, "--q differs from the SFT alphabet");
        Q rho = rational(o.rho, "rho");
        Z phi = phi_threshold(rho, F.bounding_k(), o.q, o.dim, Z(long(U(o.enum_scale, o.dim).cells())));
        std::ostringstream pats;
        long n = 0;
        enumerate_WF(F, rho, o.enum_scale, o.dim, phi, {o.budget}, [&](const Pattern& w, const Pattern*) {
            pats << pattern_text(w) << "\n";
            ++n;
            return true;
        });
        os << "sft " << o.sft << "\nenum_scale " << o.enum_scale << "\nrho " << rho.get_str() << "\nenum_phi "
           << phi.get_str() << "\npatterns " << n << "\n";
        run.write("patterns.txt", pats.str());
        run.say("patterns " + std::to_string(n));
    }
    run.write("cover.txt", os.str());
    run.say("psi_bits " + p.psi_bits.get_str());
}

void cmd_witness(Run& run, Options& o) {
    auto F = named_sft(o.sft, o.dim);
    WitnessConfig cfg;
    cfg.noisy_scale = o.noisy_scale;
    cfg.ref_scale = o.ref_scale;
    cfg.pair_scale = o.pair_scale;
    cfg.dim = o.dim;
    cfg.max_rank = o.witness_rank;
    cfg.budget = o.budget;
    cfg.seed = o.seed;
    auto v = stability_witness(F, rational(o.delta, "delta"), rational(o.weps, "epsilon"), rational(o.rho, "rho"),
                               rational(o.gamma, "gamma"), cfg);
    run.write("verdict.txt", text([&](std::ostream& os) {
        os << "verdict " << verdict_name(v.kind) << "\n";
        if (!v.layer.empty()) os << "exhausted " << v.layer << "\n";
        os << "noisy_patterns " << v.noisy_patterns << "\nreference_patterns " << v.reference_patterns
           << "\npair_candidates " << v.pair_candidates << "\nphi_gamma " << v.phi_gamma.get_str() << "\nphi_rho "
           << v.phi_rho.get_str() << "\n";
        if (v.w) os << "witness_w " << pattern_text(*v.w) << "\nwitness_b " << pattern_text(*v.b) << "\n";
    }));
    run.say(std::string("verdict ") + verdict_name(v.kind) + (v.layer.empty() ? "" : " (" + v.layer + ")"));
}

void cmd_compile_tm(Run& run, Options& o) {
    auto M = load_machine(run, o.machine);
    auto ct = cc::compile(cc::parse_variant(o.tm_variant), M, o.alphabet_budget);
    run.write("tileset.txt", text([&](std::ostream& os) { io::write_forbidden(os, ct.forbidden); }));
    run.write("certificate.txt", text([&](std::ostream& os) { cc::write_certificate(os, ct); }));
    run.write("machine.txt", tm::to_text(ct.machine()));
    run.write("machine_tiles.txt", text([&](std::ostream& os) {
        for (std::size_t i = 0; i < ct.fabric.tiles().size(); ++i) os << 'm' << i << ' ' << ct.fabric.describe(Sym(i)) << "\n";
    }));
    run.write("summary.txt", text([&](std::ostream& os) {
        os << "variant " << cc::variant_name(ct.variant) << "\nstructure " << ct.structural().tag << "\nalphabet "
           << ct.alphabet->size() << "\n";
        for (auto& l : ct.alphabet->layers()) os << "layer " << l.name << ' ' << l.symbols.size() << "\n";
        os << "rules " << ct.forbidden.rules.size() << "\n";
        for (auto& [f, n] : ct.family_counts()) os << "rule_family " << f << ' ' << n << "\n";
    }));
    run.say("alphabet " + std::to_string(ct.alphabet->size()) + " rules " + std::to_string(ct.forbidden.rules.size()));
}

void cmd_verify_tm(Run& run, Options& o) {
    auto M = load_machine(run, o.machine);
    auto ct = cc::compile(cc::parse_variant(o.tm_variant), M, o.alphabet_budget);
    std::vector<std::string> u;
    if (!o.input.empty()) u = tm::tokens_of(o.input, ct.wrapped.sigma.empty() ? std::vector<std::string>{} : ct.wrapped.sigma);
    auto orient = rb::parse_orientation(o.orient);
    require(o.tm_max_scale >= 1, "max scale must be >= 1");
    std::ostringstream rows;
    rows << "n,horizon,halted_within_horizon,transition_admissible,freeze_active\n";
    for (int n = 1; n <= o.tm_max_scale; ++n) {
        auto b = cc::verify_scale_behaviour(ct, n, u, orient);
        rows << n << ',' << b.horizon << ',' << b.halted_within_horizon << ',' << b.transition_admissible << ','
             << b.freeze_active << "\n";
    }
    run.write("behaviour.csv", rows.str());
    std::vector<int> direct_input;
    for (auto& a : u) direct_input.push_back(ct.source.symbol_index(a));
    auto sim = tm::simulate_tm(ct.source, direct_input, 1L << std::min(o.tm_max_scale + 4, 40));
    run.write("simulation.txt", text([&](std::ostream& os) {
        os << "machine_steps_cap " << (1L << std::min(o.tm_max_scale + 4, 40)) << "\nhalted " << sim.halted
           << "\nsteps " << sim.steps << "\n";
    }));
    if (o.emit_scale > 0) {
        cc::SimulationChoices ch;
        ch.orientation = orient;
        ch.transition = o.transition;
        ch.transition_colour = colour_letter(o.transition_colour, "transition colour");
        if (!o.red_aux.empty()) ch.red_aux = colour_letter(o.red_aux, "Red channel colour");
        ch.input = u;
        auto c = cc::build_simulation_macrotile(ct, o.emit_scale, ch);
        run.write("macro.cfg", text([&](std::ostream& os) { io::write_config(os, c); }));
        run.write("patches.txt", text([&](std::ostream& os) {
            os << "nsft-patches v1\nsize " << c.width << ' ' << c.height << "\n";
            for (int y = 0; y < c.height; ++y) {
                for (int x = 0; x < c.width; ++x) {
                    auto k = ct.fabric.tiles()[c.alphabet->component(c.at(x, y), cc::CompiledTileset::MACHINE)].kind;
                    os << (k == cc::CellKind::patch ? '1' : k == cc::CellKind::vchan || k == cc::CellKind::hchan ? '2' : '0');
                }
                os << "\n";
            }
            os << "end\n";
        }));
    }
    run.say(rows.str());
}

void cmd_bounds(Run& run, Options& o) {
    std::ostringstream os;
    if (o.what == "rate") {
        auto r = polynomial_rate(rational(o.alpha, "alpha"), rational(o.beta, "beta"));
        os << "alpha,beta,theta_lo,theta_hi,exponent_lo,exponent_hi,constant_lo,constant_hi\n"
           << r.alpha.get_str() << ',' << r.beta.get_str() << ',' << r.theta.lo.str() << ',' << r.theta.hi.str() << ','
           << r.exponent.lo.str() << ',' << r.exponent.hi.str() << ',' << r.constant.lo.str() << ','
           << r.constant.hi.str() << "\n";
    } else if (o.what == "dk") {
        Q a = rational(o.alpha, "alpha"), b = rational(o.beta, "beta"), e = rational(o.beps, "epsilon");
        auto r = polynomial_rate(a, b);
        auto m = min_Dk_bruteforce(a, b, e, o.K, o.kmax);
        auto bd = r.bound(e);
        os << "alpha,beta,eps,K,k_max,min,argmin,in_domain,bound_lo,bound_hi,min_le_bound\n"
           << a.get_str() << ',' << b.get_str() << ',' << e.get_str() << ',' << o.K << ',' << o.kmax << ','
           << m.value.get_str() << ',' << m.argmin << ',' << (r.valid_at(e, o.K) ? "yes" : "no") << ','
           << bd.lo.str() << ',' << bd.hi.str() << ',' << (certainly_le(Interval::of(m.value), bd) ? "yes" : "no")
           << "\n";
    } else if (o.what == "profile") {
        auto p = construction_constants(parse_construction(o.construction), o.scale);
        Q e = rational(o.beps, "epsilon");
        os << "construction,n,p,C,rho,d,eps,besicovitch_bound\n"
           << o.construction << ',' << o.scale << ',' << p.p.get_str() << ',' << p.C.get_str() << ','
           << p.rho.get_str() << ',' << p.d << ',' << e.get_str() << ',' << besicovitch_bound(p, e).get_str() << "\n";
    } else if (o.what == "recurrence") {
        require(o.scale >= 1 && o.scale <= 64, "scale out of range");
        os << "n,r_n,lower,gap,gap_bound\n";
        for (int n = 1; n <= o.scale; ++n) {
            Z r = red_area(n);
            Z lower = zpow(4, n + 1) * (zpow(4, n) - zpow(3, n));
            Z side = zpow(2, 2 * n + 1) - 1;
            os << n << ',' << r.get_str() << ',' << lower.get_str() << ',' << Z(side * side - r).get_str() << ','
               << Z(4 * zpow(12, n)).get_str() << "\n";
        }
    } else
        throw input_error("unknown bounds query '" + o.what + "'");
    run.write("bounds.csv", os.str());
    run.say(os.str());
}

void cmd_render(Run& run, Options& o) {
    require(!o.in.empty(), "--in is required");
    require(o.format == "ppm" || o.format == "svg" || o.format == "both", "format must be ppm, svg or both");
    auto c = load_config(run, o.in);
    const auto* ts = detect_structure(c);
    Configuration s = ts ? layer0(c, *ts) : c;
    render::RenderStyle st;
    st.cell = o.cell;
    render::Overlays ov;
    NoiseField noise;
    FlipLog log;
    if (!o.noise_file.empty()) {
        std::istringstream is(run.read(o.noise_file));
        noise = io::read_noise(is);
        ov.noise = &noise;
        st.noise = true;
    }
    if (!o.fliplog_file.empty()) {
        std::istringstream is(run.read(o.fliplog_file));
        log = io::read_fliplog(is);
        ov.flips = &log;
        st.flips = true;
    }
    if (o.red_squares) {
        require(ts != nullptr, "red-square overlay needs a Robinson configuration");
        ov.squares = rb::red_squares(s, *ts);
        st.red_squares = true;
    }
    if (!o.patches_file.empty()) {
        std::istringstream is(run.read(o.patches_file));
        io::expect_word(is, "nsft-patches");
        io::expect_word(is, "v1");
        io::expect_word(is, "size");
        int w = io::read_val<int>(is), h = io::read_val<int>(is);
        require(w == c.width && h == c.height, "patch overlay does not match the configuration");
        ov.patch_kind.assign(std::size_t(w) * h, 0);
        for (int y = 0; y < h; ++y) {
            auto row = io::read_val<std::string>(is);
            require(int(row.size()) == w, "bad patch row");
            for (int x = 0; x < w; ++x) ov.patch_kind[std::size_t(y) * w + x] = std::uint8_t(row[x] - '0');
        }
        st.patches = true;
    }
    auto img = render::render_config(s, st, ov, ts);
    if (o.format != "svg") run.write("image.ppm", text([&](std::ostream& os) { render::write_ppm(os, img); }));
    if (o.format != "ppm") run.write("image.svg", text([&](std::ostream& os) { render::write_svg(os, img); }));
    run.write("render.txt", text([&](std::ostream& os) {
        os << "structure " << (ts ? ts->tag : "generic") << "\nwidth " << img.width << "\nheight " << img.height
           << "\nred_square_outlines " << render::square_outlines(render::render_config(s, st, {}, ts), st.palette.at(rb::RED))
           << "\noverlay_squares " << ov.squares.size() << "\nobscured_pixels " << img.count(render::OBSCURED)
           << "\nnoise_popcount " << (ov.noise ? noise.popcount() : 0) << "\n";
    }));
    run.say("image " + std::to_string(img.width) + "x" + std::to_string(img.height));
}

// ---------------------------------------------------------------------------

struct Manifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> params, inputs;
    std::map<std::string, std::string> outputs;  // name -> "size sha"
};

Manifest read_manifest(const std::string& textv) {
    std::istringstream is(textv);
    std::string line;
    Manifest m;
    if (!std::getline(is, line) || line != "nsft-manifest v1") throw input_error("not an nsft manifest");
    while (std::getline(is, line)) {
        auto sp = line.find(' ');
        std::string key = line.substr(0, sp), rest = sp == std::string::npos ? "" : line.substr(sp + 1);
        if (key == "command") m.command = rest;
        else if (key == "param" || key == "input") {
            auto s2 = rest.find(' ');
            std::string a = rest.substr(0, s2), b = s2 == std::string::npos ? "" : rest.substr(s2 + 1);
            (key == "param" ? m.params : m.inputs).push_back({a, b});
        } else if (key == "output") {
            auto s2 = rest.find(' ');
            if (s2 == std::string::npos) throw input_error("bad output line in manifest");
            m.outputs[rest.substr(0, s2)] = rest.substr(s2 + 1);
        }
    }
    if (m.command.empty()) throw input_error("manifest names no command");
    return m;
}

int run_cli(std::vector<std::string> args);

int replay(const std::string& manifest_path, const std::string& out) {
    auto m = read_manifest(slurp(manifest_path));
    if (m.command == "replay") throw input_error("cannot replay a replay");
    for (auto& [path, sha] : m.inputs)
        if (sha256(slurp(path)) != sha) throw inconsistency_error("input changed since the recorded run: " + path);
    std::vector<std::string> args{m.command};
    for (auto& [k, v] : m.params) {
        if (v == "true" || v == "false") {
            if (v == "true") args.push_back("--" + k);
            continue;
        }
        if (v.empty()) continue;
        args.push_back("--" + k);
        args.push_back(v);
    }
    args.push_back("--out");
    args.push_back(out);
    int rc = run_cli(args);
    if (rc != EXIT_OK) return rc;
    auto again = read_manifest(slurp(fs::path(out) / "manifest.txt"));
    int bad = 0;
    for (auto& [name, sig] : m.outputs) {
        auto it = again.outputs.find(name);
        if (it == again.outputs.end() || it->second != sig) {
            std::cerr << "replay mismatch: " << name << "\n";
            ++bad;
        }
    }
    for (auto& [name, sig] : again.outputs)
        if (!m.outputs.count(name)) {
            std::cerr << "replay produced an extra artifact: " << name << "\n";
            ++bad;
        }
    if (bad) return EXIT_INCONSISTENT;
    std::cout << "replay identical: " << m.outputs.size() << " artifacts\n";
    return EXIT_OK;
}

int run_cli(std::vector<std::string> args) {
    CLI::App app{"noise-stability experiments on Robinson-type tilings"};
    app.require_subcommand(1);
    app.set_version_flag("--version", TOOL_VERSION);
    Options o;
    std::map<std::string, Command> cmds;
    auto make = [&](const std::string& name, const std::string& help, void (*fn)(Run&, Options&)) -> Command& {
        Command& c = cmds[name];
        c.app = app.add_subcommand(name, help);
        c.body = [fn, &o](Run& r) { fn(r, o); };
        add_common(c, o);
        c.params.push_back({"threads", [&o] { return std::to_string(o.threads); }});
        return c;
    };

    {
        auto& c = make("gen-tileset", "build a Robinson tileset", cmd_gen_tileset);
        opt(c, "variant", o.variant, "vanilla | red_black | enhanced");
    }
    {
        auto& c = make("gen-macro", "build an n-macro-tile and its census", cmd_gen_macro);
        opt(c, "variant", o.variant, "vanilla | red_black | enhanced");
        opt(c, "scale", o.scale, "macro-tile scale n (side 2^n-1)");
        opt(c, "orient", o.orient, "NE | SE | SW | NW");
        opt(c, "base", o.base, "colour of the level-2 squares (R | K)");
        opt(c, "transition-level", o.transition_level, "enhanced: first Blue/Green level, 0 = none");
        opt(c, "transition-colour", o.transition_colour, "U | G");
    }
    {
        auto& c = make("sample-noise", "sample a Bernoulli noise field", cmd_sample_noise);
        opt(c, "eps", o.eps, "noise density");
        opt(c, "seed", o.seed, "seed");
        opt(c, "width", o.width, "width (0: use --scale)");
        opt(c, "height", o.height, "height (0: use --scale)");
        opt(c, "scale", o.scale, "macro-tile scale giving the size");
    }
    {
        auto& c = make("flip", "noisy colour-flip experiment", cmd_flip);
        opt(c, "variant", o.variant, "red_black | enhanced");
        opt(c, "scale", o.scale, "macro-tile scale N");
        opt(c, "max-scale", o.max_scale, "largest flipped scale (0: N)");
        opt(c, "start-scale", o.start_scale, "smallest flipped scale");
        opt(c, "orient", o.orient, "NE | SE | SW | NW");
        opt(c, "base", o.base, "base colour");
        opt(c, "eps", o.eps, "noise density");
        opt(c, "trials", o.trials, "number of seeded trials");
        opt(c, "seed", o.seed, "first seed; trial t uses seed + t");
    }
    {
        auto& c = make("dist", "distances between patterns, configurations or measures", cmd_dist);
        opt(c, "mode", o.mode, "bumpy | hamming | besicovitch | alignment | dplus | coupling");
        path_opt(c, "in", o.in, "bumpy: flip output directory");
        opt(c, "variant", o.variant, "bumpy: tileset of the flip run");
        opt(c, "u", o.u, "first word (digits)");
        opt(c, "v", o.v, "second word (digits)");
        opt(c, "q", o.q, "alphabet size of the words");
        opt(c, "bernoulli", o.bernoulli, "dplus: compare with B(eps) instead of <v>");
        opt(c, "rank", o.rank, "dplus: truncation rank");
        opt(c, "r", o.r, "dplus: normalisation factor");
        opt(c, "method", o.method, "coupling: shift-exact | window-lp");
        opt(c, "lp-scale", o.lp_scale, "coupling: window of the LP");
        path_opt(c, "config-a", o.config_a, "alignment: first periodic configuration");
        path_opt(c, "config-b", o.config_b, "alignment: second periodic configuration");
        opt(c, "budget", o.budget, "shift-search work budget");
    }
    {
        auto& c = make("census", "structural census of a configuration", cmd_census);
        path_opt(c, "in", o.in, "configuration file", true);
    }
    {
        auto& c = make("cover", "covering constants and pattern enumeration", cmd_cover);
        opt(c, "delta", o.delta, "covering radius");
        opt(c, "q", o.q, "alphabet size");
        opt(c, "dim", o.dim, "dimension");
        opt(c, "forbidden-k", o.forbidden_k, "window scale of the forbidden set");
        opt(c, "sft", o.sft, "full | full:<q> | golden-mean");
        opt(c, "rho", o.rho, "enumeration threshold");
        opt(c, "enum-scale", o.enum_scale, "enumerate W_F on this window (-1: no)");
        opt(c, "budget", o.budget, "enumeration budget");
    }
    {
        auto& c = make("witness", "stability witness at fixed parameters", cmd_witness);
        opt(c, "sft", o.sft, "full | full:<q> | golden-mean");
        opt(c, "dim", o.dim, "dimension");
        opt(c, "delta", o.delta, "delta");
        opt(c, "eps", o.weps, "epsilon");
        opt(c, "rho", o.rho, "rho");
        opt(c, "gamma", o.gamma, "gamma");
        opt(c, "noisy-scale", o.noisy_scale, "window of the noisy patterns");
        opt(c, "ref-scale", o.ref_scale, "window of the reference patterns");
        opt(c, "pair-scale", o.pair_scale, "window of the coupled pairs");
        opt(c, "max-rank", o.witness_rank, "rank cap of the distance certificates");
        opt(c, "budget", o.budget, "enumeration budget");
        opt(c, "seed", o.seed, "seed");
    }
    {
        auto& c = make("compile-tm", "compile a Turing machine into a tileset", cmd_compile_tm);
        opt(c, "variant", o.tm_variant, "p1 | s1 | p2");
        opt(c, "machine", o.machine, "machine file or sample:<name>");
        opt(c, "alphabet-budget", o.alphabet_budget, "largest compiled alphabet");
    }
    {
        auto& c = make("verify-tm", "check the compiled tileset against simulation", cmd_verify_tm);
        opt(c, "variant", o.tm_variant, "p1 | s1 | p2");
        opt(c, "machine", o.machine, "machine file or sample:<name>");
        opt(c, "alphabet-budget", o.alphabet_budget, "largest compiled alphabet");
        opt(c, "max-scale", o.tm_max_scale, "check scales 1..n");
        opt(c, "input", o.input, "p2: input word u");
        opt(c, "orient", o.orient, "NE | SE | SW | NW");
        opt(c, "emit-scale", o.emit_scale, "also write the simulation macro-tile of this scale");
        flag(c, "transition", o.transition, "p1: colour transition at the emitted scale");
        opt(c, "transition-colour", o.transition_colour, "U | G");
        opt(c, "red-aux", o.red_aux, "s1/p2: Red channel colour (U | G)");
    }
    {
        auto& c = make("bounds", "rate, minimum, profile and recurrence bounds", cmd_bounds);
        opt(c, "what", o.what, "rate | dk | profile | recurrence");
        opt(c, "alpha", o.alpha, "alpha");
        opt(c, "beta", o.beta, "beta");
        opt(c, "eps", o.beps, "epsilon");
        opt(c, "K", o.K, "dk: smallest k");
        opt(c, "k-max", o.kmax, "dk: largest k");
        opt(c, "construction", o.construction, "profile: enhanced | p1");
        opt(c, "scale", o.scale, "profile: n; recurrence: largest n");
    }
    {
        auto& c = make("render", "render a configuration to PPM and/or SVG", cmd_render);
        path_opt(c, "in", o.in, "configuration file", true);
        opt(c, "cell", o.cell, "pixels per cell (odd)");
        path_opt(c, "noise", o.noise_file, "noise overlay");
        path_opt(c, "fliplog", o.fliplog_file, "flip overlay");
        path_opt(c, "patches", o.patches_file, "machine patch overlay");
        flag(c, "red-squares", o.red_squares, "outline the Red squares");
        opt(c, "format", o.format, "ppm | svg | both");
    }
    auto* rp = app.add_subcommand("replay", "re-run a manifest and compare artifacts");
    rp->add_option("manifest", o.manifest, "manifest file")->required();
    rp->add_option("--out", o.out, "output directory of the re-run")->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? EXIT_OK : EXIT_INPUT;
    }

    auto exec = [&](const std::function<int()>& f) -> int {
        try {
            return f();
        } catch (const input_error& e) {
            std::cerr << "invalid input: " << e.what() << "\n";
            return EXIT_INPUT;
        } catch (const budget_error& e) {
            std::cerr << e.what() << "\n";
            return EXIT_BUDGET;
        } catch (const inconsistency_error& e) {
            std::cerr << "internal inconsistency: " << e.what() << "\n";
            return EXIT_INCONSISTENT;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return EXIT_INTERNAL;
        }
    };

    if (rp->parsed()) return exec([&] { return replay(o.manifest, o.out); });

    std::string name = app.get_subcommands().front()->get_name();
    Command& cmd = cmds.at(name);
    fs::path out = o.out;
    if (fs::exists(out) && (!fs::is_directory(out) || !fs::is_empty(out))) {
        std::cerr << "invalid input: output directory " << out << " exists and is not empty\n";
        return EXIT_INPUT;
    }
    Run run;
    run.command = name;
    fs::path abs = fs::absolute(out).lexically_normal();
    if (abs.filename().empty()) abs = abs.parent_path();
    run.stage = abs.parent_path() / ("." + abs.filename().string() + ".partial");
    const bool existed = fs::exists(abs);
    const auto t0 = std::chrono::steady_clock::now();
    const std::string started = utc_now();
    int rc = exec([&] {
        fs::remove_all(run.stage);
        fs::create_directories(run.stage);
        cmd.body(run);
        std::ostringstream m;
        m << "nsft-manifest v1\ncommand " << name << "\ntool " << TOOL_VERSION << "\n";
        for (auto& p : cmd.params) m << "param " << p.name << ' ' << p.value() << "\n";
        for (auto& [p, sha] : run.inputs) m << "input " << p << ' ' << sha << "\n";
        for (auto& f : run.outputs) {
            auto data = slurp(run.stage / f);
            m << "output " << f << ' ' << data.size() << ' ' << sha256(data) << "\n";
        }
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
        m << "started " << started << "\nfinished " << utc_now() << "\nelapsed_ms " << ms << "\n";
        run.write("manifest.txt", m.str());
        fs::create_directories(abs);
        for (auto& e : fs::directory_iterator(run.stage)) fs::rename(e.path(), abs / e.path().filename());
        fs::remove(run.stage);
        return EXIT_OK;
    });
    if (rc != EXIT_OK) {
        std::error_code ec;
        fs::remove_all(run.stage, ec);
        if (!existed && fs::exists(abs) && fs::is_empty(abs, ec)) fs::remove(abs, ec);
        return rc;
    }
    for (auto& s : run.report) std::cout << s << (s.empty() || s.back() != '\n' ? "\n" : "");
    return EXIT_OK;
}

}  // namespace

int main(int argc, char** argv) { return run_cli(std::vector<std::string>(argv + 1, argv + argc)); }
