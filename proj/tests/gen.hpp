#pragma once

#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "capless/syntax.hpp"

namespace testing {

using namespace capless;

// Well-scoped random trees over a small pool of hints, so shadowing and name collisions happen often.
class Gen {
public:
    Gen(Dialect d, unsigned seed) : d_(d), rng_(seed) {}

    Term term(int depth) { return gen_term(depth); }

private:
    bool reacap() const { return d_ == Dialect::Reacap; }
    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
    bool coin(int pct) { return pick(100) < pct; }
    std::string hint(const char* pool) { return std::string(1, pool[pick(static_cast<int>(std::strlen(pool)))]); }

    CaptureSet cset() {
        CaptureSet c;
        for (const auto& x : terms_)
            if (coin(25)) c.insert(reacap() && coin(40) ? Capture::reach(x) : Capture::term(x));
        for (const auto& x : capts_)
            if (coin(25)) c.insert(Capture::capt(x));
        if (reacap() && coin(15)) c.insert(Capture::cap());
        return c;
    }

    Shape shape(int depth) {
        int k = depth <= 0 ? pick(2) : pick(reacap() ? 6 : 5);
        switch (k) {
            case 0: return mk_top();
            case 1:
                if (!tvars_.empty()) return mk_tvar(tvars_[pick(static_cast<int>(tvars_.size()))]);
                return mk_top();
            case 2: {
                Type param = type(depth - 1);
                Name x = ns_.fresh(hint("xyz"));
                terms_.push_back(x);
                Exist res = exist(depth - 1);
                terms_.pop_back();
                UseAnnot use = reacap() && coin(30) ? UseAnnot::Use : UseAnnot::Plain;
                return mk_fun(use, x, param, res);
            }
            case 3: {
                Name x = ns_.fresh(hint("XY"));
                Shape bound = !reacap() && !tvars_.empty() && coin(30) ? mk_tvar(tvars_.back()) : mk_top();
                tvars_.push_back(x);
                Exist res = exist(depth - 1);
                tvars_.pop_back();
                return mk_tfun(x, bound, res);
            }
            case 4: {
                Name c = ns_.fresh(hint("cd"));
                CaptureBound b = reacap() || coin(50) ? CaptureBound::star() : CaptureBound::of(cset());
                capts_.push_back(c);
                Exist res = exist(depth - 1);
                capts_.pop_back();
                return mk_cfun(c, b, res);
            }
            default: return mk_boxed(type(depth - 1));
        }
    }

    Type type(int depth) { return capt(shape(depth), coin(50) ? cset() : CaptureSet{}); }

    Exist exist(int depth) {
        if (reacap() || !coin(25)) return plain(type(depth));
        Name c = ns_.fresh(hint("cd"));
        capts_.push_back(c);
        Type t = type(depth);
        capts_.pop_back();
        return exists(c, t);
    }

    Name any_term() { return terms_[pick(static_cast<int>(terms_.size()))]; }

    Term gen_term(int depth) {
        bool have = !terms_.empty();
        int k = depth <= 0 ? (have ? 0 : 1) : pick(reacap() ? 10 : 11);
        switch (k) {
            case 0:
                if (have) return mk_var(any_term());
                [[fallthrough]];
            case 1: {
                Type t = type(1);
                Name x = ns_.fresh(hint("xyf"));
                terms_.push_back(x);
                Term body = gen_term(depth - 1);
                terms_.pop_back();
                UseAnnot use = reacap() && coin(30) ? UseAnnot::Use : UseAnnot::Plain;
                return mk_lam(use, x, t, body);
            }
            case 2: {
                Name x = ns_.fresh(hint("XY"));
                tvars_.push_back(x);
                Term body = gen_term(depth - 1);
                tvars_.pop_back();
                return mk_tlam(x, mk_top(), body);
            }
            case 3: {
                Name c = ns_.fresh(hint("cd"));
                CaptureBound b = reacap() || coin(50) ? CaptureBound::star() : CaptureBound::of(cset());
                capts_.push_back(c);
                Term body = gen_term(depth - 1);
                capts_.pop_back();
                return mk_clam(c, b, body);
            }
            case 4: {
                Term rhs = gen_term(depth - 1);
                Name x = ns_.fresh(hint("xyf"));
                terms_.push_back(x);
                Term body = gen_term(depth - 1);
                terms_.pop_back();
                return mk_let(x, rhs, body);
            }
            case 5:
                if (have) return mk_app(any_term(), any_term());
                return gen_term(depth - 1);
            case 6:
                if (have) return mk_tapp(any_term(), shape(1));
                return gen_term(depth - 1);
            case 7:
                if (have) return mk_capp(any_term(), cset());
                return gen_term(depth - 1);
            case 8:
                if (!have) return gen_term(depth - 1);
                if (reacap()) return mk_box(any_term());
                {
                    CaptureSet w = cset();
                    Name x = any_term();
                    Name c = ns_.fresh(hint("cd"));
                    capts_.push_back(c);
                    Type t = type(1);
                    capts_.pop_back();
                    return mk_pack(w, x, exists(c, t));
                }
            case 9:
                if (!have) return gen_term(depth - 1);
                if (reacap()) return mk_unbox(cset(), any_term());
                {
                    Term rhs = gen_term(depth - 1);
                    Name c = ns_.fresh(hint("cd"));
                    Name x = ns_.fresh(hint("xyf"));
                    capts_.push_back(c);
                    terms_.push_back(x);
                    Term body = gen_term(depth - 1);
                    terms_.pop_back();
                    capts_.pop_back();
                    return mk_letex(c, x, rhs, body);
                }
            default: {
                Shape s = shape(1);
                Name c = ns_.fresh(hint("cd"));
                Name x = ns_.fresh(hint("xyf"));
                capts_.push_back(c);
                terms_.push_back(x);
                Term body = gen_term(depth - 1);
                terms_.pop_back();
                capts_.pop_back();
                return mk_boundary(s, c, x, body);
            }
        }
    }

    Dialect d_;
    std::mt19937 rng_;
    NameSupply ns_{1000};
    std::vector<Name> terms_, tvars_, capts_;
};


}  // namespace testing
