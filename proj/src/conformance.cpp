#include "capless/conformance.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "capless/capless_check.hpp"
#include "capless/decap.hpp"
#include "capless/frontend.hpp"
#include "capless/reacap_check.hpp"
#include "capless/subcapture.hpp"

namespace capless {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> strings(const nlohmann::json& j, const char* key) {
    std::vector<std::string> out;
    if (j.contains(key))
        for (const auto& s : j.at(key)) out.push_back(s.get<std::string>());
    return out;
}

// First line of text starting with prefix, without the prefix.
std::optional<std::string> line_after(const std::string& text, const std::string& prefix) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
    return std::nullopt;
}

// "{a, b*}" -> {"a", "b*"}
std::vector<std::string> set_members(std::string s) {
    std::vector<std::string> out;
    if (s.size() < 2 || s.front() != '{' || s.back() != '}') return out;
    s = s.substr(1, s.size() - 2);
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        item.erase(0, item.find_first_not_of(' '));
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string first_difference(const std::string& want, const std::string& got) {
    std::istringstream a(want), b(got);
    std::string la, lb;
    for (int n = 1;; ++n) {
        bool ea = !std::getline(a, la);
        bool eb = !std::getline(b, lb);
        if (ea && eb) return "";
        if (ea || eb || la != lb) {
            return "golden differs at line " + std::to_string(n) + "\n  golden: " + (ea ? "<end>" : la) +
                   "\n  actual: " + (eb ? "<end>" : lb);
        }
    }
}

std::string check_expectation(const Expectation& x, const CliResult& r) {
    const std::string all = r.out + r.err;
    if (x.kind == "error") {
        if (r.exit == exit_code::Ok) return "expected error " + x.value + " but the command succeeded";
        if (all.find("error[" + x.value + "]") == std::string::npos &&
            all.find("\"code\": \"" + x.value + "\"") == std::string::npos)
            return "expected error " + x.value + ", got: " + all;
        return "";
    }
    if (r.exit != exit_code::Ok) return "exit " + std::to_string(r.exit) + ": " + all;
    if (x.kind == "type") {
        auto use_line = line_after(r.out, "use: ");
        if (!use_line) return "no type in output";
        auto pos = use_line->find("  type: ");
        std::string got = pos == std::string::npos ? "" : use_line->substr(pos + 8);
        if (got != x.value) return "type: expected " + x.value + ", got " + got;
        return "";
    }
    if (x.kind == "use-bound") {
        auto use_line = line_after(r.out, "use: ");
        if (!use_line) return "no use set in output";
        auto members = set_members(use_line->substr(0, use_line->find("  type: ")));
        for (const auto& m : members) {
            if (std::find(x.within.begin(), x.within.end(), m) == x.within.end())
                return "use set member " + m + " is outside the expected bound";
            if (std::find(x.not_within.begin(), x.not_within.end(), m) != x.not_within.end())
                return "use set contains " + m;
        }
        for (const auto& m : x.within)
            if (x.value == "exact" && std::find(members.begin(), members.end(), m) == members.end())
                return "use set lacks " + m;
        return "";
    }
    if (x.kind == "answer") {
        std::istringstream in(r.out);
        std::string line;
        while (std::getline(in, line))
            if (line == x.value) return "";
        return "no line '" + x.value + "' in output";
    }
    if (x.kind == "soundness") {
        auto v = line_after(r.out, "soundness: ");
        if (!v || v->rfind("ok", 0) != 0) return "soundness harness: " + r.out;
        if (v->find("0 preservation / 0 progress") == std::string::npos) return "violations: " + *v;
        return "";
    }
    if (x.kind == "translate") {
        auto v = line_after(r.out, "verified: ");
        if (!v || v->rfind("yes", 0) != 0) return "translation not verified: " + all;
        if (x.alpha_equal && v->find("alpha-equal") == std::string::npos)
            return "output type is not alpha-equal to the encoding";
        return "";
    }
    return "unknown expectation kind " + x.kind;
}

}  // namespace

bool CorpusReport::all_pass() const { return failures() == 0; }

int CorpusReport::failures() const {
    return static_cast<int>(std::count_if(entries.begin(), entries.end(), [](const auto& e) { return !e.pass; }));
}

std::vector<CorpusEntry> load_manifest(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    std::vector<CorpusEntry> out;
    try {
        for (const auto& r : j.at("entries")) {
            CorpusEntry e;
            e.id = r.at("id").get<std::string>();
            e.file = r.at("file").get<std::string>();
            e.command = r.at("command").get<std::string>();
            e.dialect = r.value("dialect", dialect_for_path(e.file, Dialect::Capless) == Dialect::Reacap
                                               ? std::string("reacap")
                                               : std::string("capless"));
            e.flags = strings(r, "flags");
            const auto& x = r.at("expect");
            e.expect.kind = x.at("kind").get<std::string>();
            e.expect.value = x.value("value", "");
            e.expect.within = strings(x, "within");
            e.expect.not_within = strings(x, "not_within");
            e.expect.alpha_equal = x.value("alpha_equal", false);
            e.golden = r.at("golden").get<std::string>();
            e.anchor = r.value("anchor", "");
            e.anchored = r.value("anchored", false);
            out.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return out;
}

CliOptions entry_options(const CorpusEntry& e) {
    CliOptions o;
    o.path = e.file;
    o.dialect = e.dialect == "reacap" ? Dialect::Reacap : Dialect::Capless;
    o.write_files = false;
    o.command = e.command;
    if (e.command == "soundness") {
        o.command = "eval";
        o.check_soundness = true;
    }
    for (const auto& f : e.flags) {
        if (f == "--trace") o.trace = true;
        else if (f == "--unsafe") o.unsafe = true;
        else if (f == "--forbid-cap-unbox") o.forbid_cap_unbox = true;
        else if (f == "--no-verify") o.verify = false;
        else if (f == "--json") o.json = true;
        else if (f.rfind("--fuel=", 0) == 0) o.fuel = std::stol(f.substr(7));
        else throw std::runtime_error(e.id + ": unknown flag " + f);
    }
    return o;
}

std::string transcript(const CliResult& r) {
    std::string t = "exit: " + std::to_string(r.exit) + "\n" + r.out + r.err;
    if (!r.translated.empty()) t += "-- output\n" + r.translated;
    return t;
}

EntryResult run_entry(const std::string& root, const CorpusEntry& e, bool update) {
    EntryResult res;
    res.id = e.id;
    std::string text;
    try {
        text = read_file(fs::path(root) / e.file);
        res.result = run_cli_source(entry_options(e), text);
    } catch (const std::exception& ex) {
        res.detail = ex.what();
        return res;
    }
    res.detail = check_expectation(e.expect, res.result);
    std::string got = transcript(res.result);
    fs::path golden = fs::path(root) / e.golden;
    if (update) {
        fs::create_directories(golden.parent_path());
        std::ofstream(golden, std::ios::binary) << got;
    } else if (res.detail.empty()) {
        std::ifstream in(golden, std::ios::binary);
        if (!in) {
            res.detail = "missing golden " + e.golden;
        } else {
            std::ostringstream s;
            s << in.rdbuf();
            res.detail = first_difference(s.str(), got);
        }
    }
    res.pass = res.detail.empty();
    return res;
}

CorpusReport run_corpus(const std::string& root, const std::string& filter, bool update) {
    auto t0 = Clock::now();
    CorpusReport rep;
    for (const auto& e : load_manifest((fs::path(root) / "manifest.json").string())) {
        if (!filter.empty() && e.id.find(filter) == std::string::npos) continue;
        rep.entries.push_back(run_entry(root, e, update));
    }
    rep.seconds = since(t0);
    return rep;
}

// --- declarative subcapturing by saturation ---

namespace {

using Row = std::vector<std::uint64_t>;

// Square boolean matrix with word rows.
class Matrix {
public:
    explicit Matrix(std::size_t n) : n_(n), w_((n + 63) / 64), rows_(n, Row(w_, 0)) {}
    bool get(std::size_t i, std::size_t j) const { return (rows_[i][j / 64] >> (j % 64)) & 1u; }
    bool set(std::size_t i, std::size_t j) {
        if (get(i, j)) return false;
        rows_[i][j / 64] |= std::uint64_t{1} << (j % 64);
        return true;
    }
    // Warshall; returns whether anything was added.
    bool close() {
        bool changed = false;
        for (std::size_t k = 0; k < n_; ++k)
            for (std::size_t i = 0; i < n_; ++i) {
                if (i == k || !get(i, k)) continue;
                for (std::size_t w = 0; w < w_; ++w) {
                    std::uint64_t add = rows_[k][w] & ~rows_[i][w];
                    if (add) {
                        rows_[i][w] |= add;
                        changed = true;
                    }
                }
            }
        return changed;
    }
    // row u |= row i & row k
    bool or_and(std::size_t u, std::size_t i, std::size_t k) {
        bool changed = false;
        for (std::size_t w = 0; w < w_; ++w) {
            std::uint64_t add = rows_[i][w] & rows_[k][w] & ~rows_[u][w];
            if (add) {
                rows_[u][w] |= add;
                changed = true;
            }
        }
        return changed;
    }
    std::size_t size() const { return n_; }

private:
    std::size_t n_;
    std::size_t w_;
    std::vector<Row> rows_;
};

class ScOracle {
public:
    ScOracle(const Context& ctx, std::vector<Capture> atoms, int max_atoms, bool with_bound)
        : atoms_(std::move(atoms)) {
        const std::uint32_t n = static_cast<std::uint32_t>(atoms_.size());
        for (std::uint32_t m = 0; m < (1u << n); ++m)
            if (std::popcount(m) <= max_atoms) {
                index_[m] = masks_.size();
                masks_.push_back(m);
            }
        rel_ = std::make_unique<Matrix>(masks_.size());
        Matrix& r = *rel_;
        const std::size_t nodes = masks_.size();
        // sc-elem
        for (std::size_t i = 0; i < nodes; ++i)
            for (std::size_t j = 0; j < nodes; ++j)
                if ((masks_[i] & ~masks_[j]) == 0) r.set(i, j);
        // sc-var and sc-bound: {a} <: C for the declared C
        for (std::uint32_t a = 0; a < n; ++a) {
            const Capture& x = atoms_[a];
            if (x.kind == CaptureKind::Cap || x.kind == CaptureKind::Reach) continue;
            const Binding* b = ctx.find(x.name);
            if (!b) continue;
            std::optional<CaptureSet> decl;
            if (x.kind == CaptureKind::Term && b->kind == BindKind::Term) decl = b->type.cs;
            if (with_bound && x.kind == CaptureKind::Capt && b->kind == BindKind::Capt && !b->cbound.unbounded)
                decl = b->cbound.set;
            if (!decl) continue;
            auto m = mask_of(*decl);
            if (m && index_.count(*m)) r.set(index_.at(1u << a), index_.at(*m));
        }
        // sc-set and sc-trans to saturation
        bool changed = true;
        while (changed) {
            changed = r.close();
            for (std::size_t u = 0; u < nodes; ++u) {
                std::uint32_t mu = masks_[u];
                for (std::uint32_t m1 = mu;; m1 = (m1 - 1) & mu) {
                    for (std::uint32_t m2 = mu;; m2 = (m2 - 1) & mu) {
                        if ((m1 | m2) == mu && m1 != mu && m2 != mu)
                            changed |= r.or_and(u, index_.at(m1), index_.at(m2));
                        if (m2 == 0) break;
                    }
                    if (m1 == 0) break;
                }
            }
        }
    }

    // nullopt when a set is outside the saturated family
    std::optional<bool> holds(const CaptureSet& c1, const CaptureSet& c2) const {
        auto m1 = mask_of(c1), m2 = mask_of(c2);
        if (!m1 || !m2 || !index_.count(*m1) || !index_.count(*m2)) return std::nullopt;
        return rel_->get(index_.at(*m1), index_.at(*m2));
    }

    const std::vector<std::uint32_t>& masks() const { return masks_; }
    CaptureSet set_of(std::uint32_t m) const {
        CaptureSet c;
        for (std::size_t a = 0; a < atoms_.size(); ++a)
            if (m & (1u << a)) c.insert(atoms_[a]);
        return c;
    }

private:
    std::optional<std::uint32_t> mask_of(const CaptureSet& c) const {
        std::uint32_t m = 0;
        for (const auto& x : c) {
            auto it = std::find(atoms_.begin(), atoms_.end(), x);
            if (it == atoms_.end()) return std::nullopt;
            m |= 1u << (it - atoms_.begin());
        }
        return m;
    }

    std::vector<Capture> atoms_;
    std::vector<std::uint32_t> masks_;
    std::unordered_map<std::uint32_t, std::size_t> index_;
    std::unique_ptr<Matrix> rel_;
};

std::string context_text(const Context& ctx) {
    std::string s = "[";
    for (const auto& b : ctx.items()) {
        if (s.size() > 1) s += ", ";
        switch (b.kind) {
            case BindKind::Term: s += b.name.hint + ": " + print(b.type, &ctx); break;
            case BindKind::Capt: s += b.name.hint + " <: " + print(b.cbound, &ctx); break;
            case BindKind::Type: s += b.name.hint + " <: " + print(b.bound, &ctx); break;
            case BindKind::Label: s += b.name.hint; break;
        }
    }
    return s + "]";
}

void note(CrossCheckReport& rep, std::string w) {
    ++rep.disagreements;
    if (rep.witnesses.size() < 5) rep.witnesses.push_back(std::move(w));
}

void merge(CrossCheckReport& into, const CrossCheckReport& r) {
    into.subcapture_capless += r.subcapture_capless;
    into.subcapture_reacap += r.subcapture_reacap;
    into.subtype_capless += r.subtype_capless;
    into.subtype_reacap += r.subtype_reacap;
    into.encode_monotone += r.encode_monotone;
    into.encode_redundant += r.encode_redundant;
    into.disagreements += r.disagreements;
    for (const auto& w : r.witnesses)
        if (into.witnesses.size() < 5) into.witnesses.push_back(w);
}

// All subsets of pool with at most k members.
std::vector<CaptureSet> small_subsets(const std::vector<Capture>& pool, int k) {
    std::vector<CaptureSet> out;
    const std::uint32_t n = static_cast<std::uint32_t>(pool.size());
    for (std::uint32_t m = 0; m < (1u << n); ++m) {
        if (std::popcount(m) > k) continue;
        CaptureSet c;
        for (std::uint32_t a = 0; a < n; ++a)
            if (m & (1u << a)) c.insert(pool[a]);
        out.push_back(c);
    }
    return out;
}

}  // namespace

bool subcapture_by_saturation(const Context& ctx, const std::vector<Capture>& atoms, int max_atoms,
                              bool with_bound, const CaptureSet& c1, const CaptureSet& c2) {
    ScOracle o(ctx, atoms, max_atoms, with_bound);
    auto r = o.holds(c1, c2);
    if (!r) throw std::invalid_argument("set outside the saturated family");
    return *r;
}

CrossCheckReport crosscheck_subcapture(const CrossCheckBounds& bounds, Dialect d) {
    auto t0 = Clock::now();
    CrossCheckReport rep;
    NameSupply ns;
    const bool capless = d == Dialect::Capless;
    long& count = capless ? rep.subcapture_capless : rep.subcapture_reacap;

    auto compare = [&](const Context& ctx, const std::vector<Capture>& atoms) {
        ScOracle oracle(ctx, atoms, bounds.max_set_atoms, capless);
        const auto& masks = oracle.masks();
        std::vector<CaptureSet> sets;
        for (auto m : masks) sets.push_back(oracle.set_of(m));
        for (std::size_t i = 0; i < sets.size(); ++i)
            for (std::size_t j = 0; j < sets.size(); ++j) {
                bool want = *oracle.holds(sets[i], sets[j]);
                bool got = capless ? subcapture_capless(ctx, sets[i], sets[j])
                                   : subcapture_reacap(ctx, sets[i], sets[j]);
                ++count;
                if (want != got)
                    note(rep, context_text(ctx) + " |- " + print(sets[i], &ctx) + " <: " + print(sets[j], &ctx) +
                                  ": algorithmic " + (got ? "true" : "false") + ", declarative " +
                                  (want ? "true" : "false"));
            }
    };

    std::function<void(const Context&, const std::vector<Capture>&, int)> grow =
        [&](const Context& ctx, const std::vector<Capture>& atoms, int depth) {
            compare(ctx, atoms);
            if (depth == bounds.max_bindings) return;
            std::string idx = std::to_string(depth + 1);
            // binding sets draw from the atoms bound so far
            std::vector<Capture> pool = atoms;
            int k = capless ? bounds.max_set_atoms : bounds.reacap_binding_atoms;
            for (const auto& cs : small_subsets(pool, k)) {
                Name x = ns.fresh("x" + idx);
                std::vector<Capture> next = atoms;
                next.push_back(Capture::term(x));
                if (!capless) next.push_back(Capture::reach(x));
                grow(ctx.extend_term(x, capt(mk_top(), cs)), next, depth + 1);
            }
            Name c = ns.fresh("c" + idx);
            std::vector<Capture> next = atoms;
            next.push_back(Capture::capt(c));
            if (capless) {
                grow(ctx.extend_capt(c, CaptureBound::star()), next, depth + 1);
                for (const auto& cs : small_subsets(pool, k))
                    grow(ctx.extend_capt(c, CaptureBound::of(cs)), next, depth + 1);
            } else {
                grow(ctx.extend_capt(c), next, depth + 1);
            }
        };
    std::vector<Capture> start;
    if (!capless) start.push_back(Capture::cap());
    grow(Context{}, start, 0);
    rep.seconds = since(t0);
    return rep;
}

// --- declarative subtyping over an enumerated universe ---

namespace {

struct Universe {
    struct ShapeNode {
        Shape shape;
        std::string key;
        int param = -1, result = -1;  // type indices for Fun, param for Boxed
        int bound = -1;               // TVar: shape index of its bound
        UseAnnot use = UseAnnot::Plain;
    };
    struct TypeNode {
        Type type;
        int shape;
        int cs;
    };
    std::vector<ShapeNode> shapes;
    std::vector<TypeNode> types;
    std::vector<CaptureSet> csets;
    std::map<std::string, int> shape_index;
    std::map<std::pair<int, int>, int> type_index;

    int add_shape(ShapeNode n) {
        auto it = shape_index.find(n.key);
        if (it != shape_index.end()) return it->second;
        shapes.push_back(std::move(n));
        return shape_index[shapes.back().key] = static_cast<int>(shapes.size()) - 1;
    }
    int add_type(int s, int c) {
        auto it = type_index.find({s, c});
        if (it != type_index.end()) return it->second;
        types.push_back({capt(shapes[s].shape, csets[c]), s, c});
        return type_index[{s, c}] = static_cast<int>(types.size()) - 1;
    }
    std::string type_key(int t) const {
        return "(" + shapes[types[t].shape].key + ")^" + std::to_string(types[t].cs);
    }
};

}  // namespace

CrossCheckReport crosscheck_subtype(const CrossCheckBounds& bounds, Dialect d) {
    auto t0 = Clock::now();
    CrossCheckReport rep;
    NameSupply ns;
    const bool capless = d == Dialect::Capless;
    long& count = capless ? rep.subtype_capless : rep.subtype_reacap;

    // Capless: [X <: Top, Y <: X, io <: *, a: Top^{io}, b: Top^{a}]
    // Reacap:  [X <: Top, a: Top^{cap}, b: Top^{a}]
    Name X = ns.fresh("X"), Y = ns.fresh("Y"), io = ns.fresh("io"), a = ns.fresh("a"), b = ns.fresh("b");
    Context ctx = Context{}.extend_type(X, mk_top());
    std::vector<Capture> atoms;
    if (capless) {
        ctx = ctx.extend_type(Y, mk_tvar(X))
                  .extend_capt(io)
                  .extend_term(a, capt(mk_top(), CaptureSet::of_capt(io)))
                  .extend_term(b, capt(mk_top(), CaptureSet::of_term(a)));
        atoms = {Capture::capt(io), Capture::term(a), Capture::term(b)};
    } else {
        ctx = ctx.extend_term(a, capt(mk_top(), CaptureSet{Capture::cap()}))
                  .extend_term(b, capt(mk_top(), CaptureSet::of_term(a)));
        atoms = {Capture::cap(), Capture::term(a), Capture::term(b)};
    }
    ScOracle sc(ctx, atoms, 3, capless);

    Universe u;
    u.csets = {CaptureSet{}, CaptureSet::of_term(b),
               capless ? CaptureSet::of_term(a) : CaptureSet{Capture::cap()}};
    const std::vector<int> leaf_cs = {0, 1, 2};
    const std::vector<int> inner_cs = {0, 1};

    int top = u.add_shape({mk_top(), "Top"});
    int xs = u.add_shape({mk_tvar(X), "X", -1, -1, top});
    std::vector<int> level1 = {top, xs};
    if (capless) level1.push_back(u.add_shape({mk_tvar(Y), "Y", -1, -1, xs}));

    std::vector<int> pool;  // type indices usable as components
    for (int s : level1)
        for (int c : leaf_cs) pool.push_back(u.add_type(s, c));

    std::vector<UseAnnot> uses = {UseAnnot::Plain};
    if (!capless) uses.push_back(UseAnnot::Use);
    auto add_level = [&](const std::vector<int>& comps, const std::vector<int>& cs_choices) {
        std::vector<int> made;
        for (UseAnnot use : uses)
            for (int p : comps)
                for (int r : comps) {
                    Shape s = mk_fun(use, ns.fresh("z"), u.types[p].type, plain(u.types[r].type));
                    std::string key = std::string(use == UseAnnot::Use ? "use " : "") + "fun " + u.type_key(p) +
                                      " -> " + u.type_key(r);
                    made.push_back(u.add_shape({s, key, p, r, -1, use}));
                }
        if (!capless)
            for (int p : comps) made.push_back(u.add_shape({mk_boxed(u.types[p].type), "box " + u.type_key(p), p}));
        std::vector<int> types;
        for (int s : made)
            for (int c : cs_choices) types.push_back(u.add_type(s, c));
        return types;
    };
    std::vector<int> level2 = add_level(pool, inner_cs);
    if (bounds.type_depth >= 3) {
        // A deterministic spread of components, mixing both levels.
        std::vector<int> seed;
        for (std::size_t i = 0; i < pool.size(); i += 2) seed.push_back(pool[i]);
        for (std::size_t i = 0; i < level2.size(); i += std::max<std::size_t>(1, level2.size() / 5))
            seed.push_back(level2[i]);
        add_level(seed, inner_cs);
    }

    const std::size_t S = u.shapes.size(), T = u.types.size();
    Matrix sh(S), ty(T);
    auto sc_holds = [&](int c1, int c2) { return *sc.holds(u.csets[c1], u.csets[c2]); };
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < S; ++i) {
            const auto& si = u.shapes[i];
            changed |= sh.set(i, i);                                   // refl
            changed |= sh.set(i, top);                                 // top
            if (si.bound >= 0) changed |= sh.set(i, si.bound);         // tvar
            for (std::size_t j = 0; j < S; ++j) {
                const auto& sj = u.shapes[j];
                bool fun_i = si.result >= 0, fun_j = sj.result >= 0;
                bool box_i = si.param >= 0 && !fun_i, box_j = sj.param >= 0 && !fun_j;
                if (fun_i && fun_j && use_leq(si.use, sj.use) && ty.get(sj.param, si.param) &&
                    ty.get(si.result, sj.result))
                    changed |= sh.set(i, j);                           // fun
                if (box_i && box_j && ty.get(si.param, sj.param)) changed |= sh.set(i, j);  // boxed
            }
        }
        for (std::size_t p = 0; p < T; ++p)
            for (std::size_t q = 0; q < T; ++q)
                if (sh.get(u.types[p].shape, u.types[q].shape) && sc_holds(u.types[p].cs, u.types[q].cs))
                    changed |= ty.set(p, q);                           // capt
        changed |= sh.close();                                         // trans
        changed |= ty.close();
    }

    TypeDefContext defs;
    for (std::size_t p = 0; p < T; ++p)
        for (std::size_t q = 0; q < T; ++q) {
            bool want = ty.get(p, q);
            bool got = capless ? subtype_capless(ctx, u.types[p].type, u.types[q].type, ns)
                               : subtype_reacap(ctx, defs, u.types[p].type, u.types[q].type, ns);
            ++count;
            if (want != got)
                note(rep, context_text(ctx) + " |- " + print(u.types[p].type, &ctx) + " <: " +
                              print(u.types[q].type, &ctx) + ": algorithmic " + (got ? "true" : "false") +
                              ", declarative " + (want ? "true" : "false"));
        }
    rep.seconds = since(t0);
    return rep;
}

CrossCheckReport crosscheck_encode(const CrossCheckBounds&) {
    auto t0 = Clock::now();
    CrossCheckReport rep;
    NameSupply ns;
    Name c1 = ns.fresh("c1"), c2 = ns.fresh("c2"), c3 = ns.fresh("c3");
    Name x = ns.fresh("x"), y = ns.fresh("y");
    const std::vector<Capture> targets = {Capture::capt(c1), Capture::capt(c2), Capture::capt(c3)};
    const std::vector<CaptureSet> all_d = small_subsets(targets, 3);
    const std::vector<Capture> sources = {Capture::term(x), Capture::reach(y), Capture::cap()};
    const std::vector<CaptureSet> all_c = small_subsets(sources, 3);

    std::vector<CaptureBound> b2 = {CaptureBound::star()};
    for (const auto& s : small_subsets({Capture::capt(c1)}, 1)) b2.push_back(CaptureBound::of(s));
    std::vector<CaptureBound> b3 = {CaptureBound::star()};
    for (const auto& s : small_subsets({Capture::capt(c1), Capture::capt(c2)}, 2)) b3.push_back(CaptureBound::of(s));

    for (const auto& bound2 : b2)
        for (const auto& bound3 : b3) {
            Context delta = Context{}.extend_capt(c1).extend_capt(c2, bound2).extend_capt(c3, bound3);
            ScOracle sc(delta, targets, 3, true);
            for (const auto& rho_x : all_d) {
                TranslationContext tau;
                tau.rho[x.serial] = rho_x;
                tau.rho_star[y.serial] = CaptureSet::of_capt(c3);
                for (const auto& d1 : all_d)
                    for (const auto& d2 : all_d) {
                        if (!*sc.holds(d1, d2)) continue;
                        for (const auto& c : all_c) {
                            CaptureSet e1 = encode_cset(tau.with_interp(d1), c);
                            CaptureSet e2 = encode_cset(tau.with_interp(d2), c);
                            ++rep.encode_monotone;
                            if (!*sc.holds(e1, e2))
                                note(rep, "monotonicity: " + context_text(delta) + " D1 = " + print(d1, &delta) +
                                              ", D2 = " + print(d2, &delta) + ", C has " +
                                              std::to_string(c.size()) + " atoms: " + print(e1, &delta) +
                                              " </: " + print(e2, &delta));
                            if (!c.contains_cap()) {
                                ++rep.encode_redundant;
                                if (!(e1 == e2))
                                    note(rep, "cap-free set encodes differently under D1 = " + print(d1, &delta) +
                                                  " and D2 = " + print(d2, &delta));
                            }
                        }
                    }
            }
        }
    rep.seconds = since(t0);
    return rep;
}

CrossCheckReport enumerate_and_crosscheck(const CrossCheckBounds& b) {
    auto t0 = Clock::now();
    CrossCheckReport rep;
    merge(rep, crosscheck_subcapture(b, Dialect::Capless));
    merge(rep, crosscheck_subcapture(b, Dialect::Reacap));
    merge(rep, crosscheck_subtype(b, Dialect::Capless));
    merge(rep, crosscheck_subtype(b, Dialect::Reacap));
    merge(rep, crosscheck_encode(b));
    rep.seconds = since(t0);
    return rep;
}

}  // namespace capless
