// Conflict-driven clause learning SAT core with assumption handling and
// final-conflict analysis for unsat-core extraction.
//
// Literals use the external DIMACS convention (+-(var+1)) at the API
// boundary and the packed 2*v / 2*v+1 convention internally.  The solver
// is fully deterministic: branching ties break on variable index, there
// is no randomness anywhere, and reset_learnts() restores the engine to
// a canonical baseline so a query's outcome depends only on the clause
// database and the query itself.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <unordered_set>
#include <vector>

namespace py = pybind11;
using std::vector;

namespace {

constexpr uint8_t U_FALSE = 0;
constexpr uint8_t U_TRUE = 1;
constexpr uint8_t U_UNDEF = 2;

inline int var_of(int lit) { return lit >> 1; }
inline int neg_lit(int lit) { return lit ^ 1; }
inline bool sign_of(int lit) { return lit & 1; }  // true = negative

struct Clause {
    double act = 0.0;
    int64_t id = 0;
    bool learnt = false;
    bool doomed = false;
    vector<int> lits;
};

struct Watcher {
    Clause* c;
    int blocker;
};

class Solver {
  public:
    int solve_status = 0;  // 1 SAT, 0 UNSAT, -1 budget abort

    void ensure_vars(int n) {
        while (nvars_ < n) {
            watches_.emplace_back();
            watches_.emplace_back();
            assigns_.push_back(U_UNDEF);
            level_.push_back(0);
            reason_.push_back(nullptr);
            activity_.push_back(0.0);
            polarity_.push_back(0);
            user_pol_.push_back(0);
            seen_.push_back(0);
            heap_pos_.push_back(-1);
            heap_insert(nvars_);
            ++nvars_;
        }
    }

    int num_vars() const { return nvars_; }

    // Fix the first-try branching polarity of the given variables.  A pure
    // search heuristic (completeness is unaffected); part of the engine's
    // canonical configuration, so reset_learnts keeps it.
    void set_polarity_hints(const vector<int>& lits) {
        for (int e : lits) user_pol_[std::abs(e) - 1] = e > 0 ? 1 : 2;
    }

    // External signed lits.  Returns false if the database became unsat.
    bool add_clause(const vector<int>& ext) {
        if (!ok_) return false;
        vector<int> lits;
        lits.reserve(ext.size());
        int maxv = 0;
        for (int e : ext) maxv = std::max(maxv, std::abs(e));
        ensure_vars(maxv);
        // Adding is only legal at decision level 0.
        cancel_until(0);
        for (int e : ext) {
            int v = std::abs(e) - 1;
            int lit = 2 * v + (e < 0 ? 1 : 0);
            lits.push_back(lit);
        }
        std::sort(lits.begin(), lits.end());
        lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
        for (size_t i = 0; i + 1 < lits.size(); ++i)
            if (lits[i] == neg_lit(lits[i + 1])) return true;  // tautology
        // Drop level-0 false literals; satisfied clause at level 0 is kept
        // anyway (cheap, keeps the database stable for group dumps).
        vector<int> kept;
        for (int l : lits) {
            uint8_t v = value(l);
            if (v == U_TRUE && level_[var_of(l)] == 0) return true;
            if (v == U_FALSE && level_[var_of(l)] == 0) continue;
            kept.push_back(l);
        }
        if (kept.empty()) {
            ok_ = false;
            return false;
        }
        if (kept.size() == 1) {
            unit_facts_.push_back(kept[0]);
            unchecked_enqueue(kept[0], nullptr);
            if (propagate() != nullptr) {
                ok_ = false;
                return false;
            }
            return true;
        }
        auto cl = std::make_unique<Clause>();
        cl->lits = std::move(kept);
        cl->id = next_id_++;
        Clause* c = cl.get();
        owned_.push_back(std::move(cl));
        originals_.push_back(c);
        attach(c);
        return true;
    }

    int solve(const vector<int>& ext_assumps, int64_t conflict_budget) {
        core_.clear();
        model_.clear();
        if (!ok_) return solve_status = 0;
        assumptions_.clear();
        int maxv = 0;
        for (int e : ext_assumps) maxv = std::max(maxv, std::abs(e));
        ensure_vars(maxv);
        for (int e : ext_assumps) {
            int v = std::abs(e) - 1;
            assumptions_.push_back(2 * v + (e < 0 ? 1 : 0));
        }
        cancel_until(0);
        if (propagate() != nullptr) {
            ok_ = false;
            return solve_status = 0;
        }
        budget_ = conflict_budget < 0 ? -1 : conflicts_ + conflict_budget;
        int status = search();
        cancel_until(0);
        return solve_status = status;
    }

    vector<int> model() const { return model_; }
    vector<int> core() const { return core_; }

    void reset_learnts() {
        cancel_until(0);
        // Drop every level-0 assignment (learnt units leave facts on the
        // trail); they are re-derived below from the original unit clauses.
        for (int lit : trail_) {
            assigns_[var_of(lit)] = U_UNDEF;
            reason_[var_of(lit)] = nullptr;
        }
        trail_.clear();
        qhead_ = 0;
        for (auto lit_ws = watches_.begin(); lit_ws != watches_.end(); ++lit_ws)
            lit_ws->clear();
        // Restore the canonical (as-added, sorted) literal order so the
        // rebuilt watch structure is identical no matter what was solved
        // before; a reset engine is a pure function of its clause database.
        for (Clause* c : originals_) {
            std::sort(c->lits.begin(), c->lits.end());
            attach(c);
        }
        // Free learnt clauses.
        owned_.erase(std::remove_if(owned_.begin(), owned_.end(),
                                    [](const std::unique_ptr<Clause>& c) {
                                        return c->learnt;
                                    }),
                     owned_.end());
        learnts_.clear();
        std::fill(activity_.begin(), activity_.end(), 0.0);
        std::fill(polarity_.begin(), polarity_.end(), 0);
        var_inc_ = 1.0;
        cla_inc_ = 1.0;
        restart_seq_ = 0;
        heap_.clear();
        std::fill(heap_pos_.begin(), heap_pos_.end(), -1);
        for (int v = 0; v < nvars_; ++v) heap_insert(v);
        if (!ok_) return;
        for (int lit : unit_facts_) {
            uint8_t v = value(lit);
            if (v == U_FALSE) { ok_ = false; return; }
            if (v == U_UNDEF) unchecked_enqueue(lit, nullptr);
        }
        if (propagate() != nullptr) ok_ = false;
    }

    // Pooled-assumption interface: a fixed literal pool is registered once;
    // each call then selects per-pool-literal sign with a byte mask
    // (nonzero byte = the pool literal itself, zero = its negation).  This
    // avoids rebuilding and converting huge assumption lists per call.
    void set_assumption_pool(const vector<int>& lits) {
        pool_ = lits;
        int maxv = 0;
        for (int e : lits) maxv = std::max(maxv, std::abs(e));
        ensure_vars(maxv);
    }

    int solve_pooled(const vector<int>& base, const std::string& mask,
                     int64_t conflict_budget) {
        scratch_.clear();
        scratch_.insert(scratch_.end(), base.begin(), base.end());
        size_t n = std::min(pool_.size(), mask.size());
        for (size_t i = 0; i < n; ++i)
            scratch_.push_back(mask[i] ? pool_[i] : -pool_[i]);
        return solve(scratch_, conflict_budget);
    }

    // Model projection: report only the true variables among a registered
    // set of interesting variables (cheap to extract and convert).
    void set_model_filter(const vector<int>& vars) { filter_ = vars; }

    vector<int> filtered_model() const {
        vector<int> out;
        for (int v : filter_)
            if (v >= 1 && v <= (int)model_.size() && model_[v - 1] > 0)
                out.push_back(v);
        return out;
    }

    int64_t conflicts() const { return conflicts_; }
    int64_t propagations() const { return propagations_; }
    int64_t decisions() const { return decisions_; }
    int64_t num_learnts() const { return (int64_t)learnts_.size(); }
    int64_t num_clauses() const { return (int64_t)originals_.size(); }

  private:
    int nvars_ = 0;
    bool ok_ = true;
    vector<std::unique_ptr<Clause>> owned_;
    vector<Clause*> originals_;
    vector<int> unit_facts_;   // units passed to add_clause, for reset replay
    vector<Clause*> learnts_;
    vector<vector<Watcher>> watches_;
    vector<uint8_t> assigns_;
    vector<int> level_;
    vector<Clause*> reason_;
    vector<double> activity_;
    vector<uint8_t> polarity_;
    vector<uint8_t> user_pol_;   // 0 none, 1 prefer true, 2 prefer false
    vector<uint8_t> seen_;
    vector<int> trail_;
    vector<int> trail_lim_;
    size_t qhead_ = 0;
    vector<int> assumptions_;
    vector<int> heap_;
    vector<int> heap_pos_;
    double var_inc_ = 1.0;
    double cla_inc_ = 1.0;
    int64_t next_id_ = 1;
    int64_t conflicts_ = 0, propagations_ = 0, decisions_ = 0;
    int64_t budget_ = -1;
    int restart_seq_ = 0;
    vector<int> model_;
    vector<int> core_;
    vector<int> analyze_stack_;
    vector<int> pool_;      // pooled-assumption literals (see solve_pooled)
    vector<int> filter_;    // variables reported by filtered_model
    vector<int> scratch_;   // reusable assumption buffer for solve_pooled

    uint8_t value(int lit) const {
        uint8_t a = assigns_[var_of(lit)];
        if (a == U_UNDEF) return U_UNDEF;
        return (uint8_t)(a ^ (uint8_t)sign_of(lit));
    }

    int decision_level() const { return (int)trail_lim_.size(); }

    void attach(Clause* c) {
        watches_[neg_lit(c->lits[0])].push_back({c, c->lits[1]});
        watches_[neg_lit(c->lits[1])].push_back({c, c->lits[0]});
    }

    void unchecked_enqueue(int lit, Clause* from) {
        int v = var_of(lit);
        assigns_[v] = sign_of(lit) ? U_FALSE : U_TRUE;
        level_[v] = decision_level();
        reason_[v] = from;
        polarity_[v] = sign_of(lit) ? 0 : 1;
        trail_.push_back(lit);
    }

    void new_decision_level() { trail_lim_.push_back((int)trail_.size()); }

    void cancel_until(int lvl) {
        if (decision_level() <= lvl) return;
        for (int i = (int)trail_.size() - 1; i >= trail_lim_[lvl]; --i) {
            int v = var_of(trail_[i]);
            assigns_[v] = U_UNDEF;
            reason_[v] = nullptr;
            if (heap_pos_[v] < 0) heap_insert(v);
        }
        trail_.resize(trail_lim_[lvl]);
        trail_lim_.resize(lvl);
        qhead_ = trail_.size();
    }

    Clause* propagate() {
        Clause* conflict = nullptr;
        while (qhead_ < trail_.size()) {
            int p = trail_[qhead_++];
            ++propagations_;
            vector<Watcher>& ws = watches_[p];
            size_t i = 0, j = 0;
            while (i < ws.size()) {
                Watcher w = ws[i];
                if (value(w.blocker) == U_TRUE) {
                    ws[j++] = ws[i++];
                    continue;
                }
                Clause* c = w.c;
                vector<int>& lits = c->lits;
                int false_lit = neg_lit(p);
                if (lits[0] == false_lit) std::swap(lits[0], lits[1]);
                ++i;
                int first = lits[0];
                if (first != w.blocker && value(first) == U_TRUE) {
                    ws[j++] = {c, first};
                    continue;
                }
                bool moved = false;
                for (size_t k = 2; k < lits.size(); ++k) {
                    if (value(lits[k]) != U_FALSE) {
                        std::swap(lits[1], lits[k]);
                        watches_[neg_lit(lits[1])].push_back({c, first});
                        moved = true;
                        break;
                    }
                }
                if (moved) continue;
                ws[j++] = {c, first};
                if (value(first) == U_FALSE) {
                    conflict = c;
                    qhead_ = trail_.size();
                    while (i < ws.size()) ws[j++] = ws[i++];
                } else {
                    unchecked_enqueue(first, c);
                }
            }
            ws.resize(j);
            if (conflict != nullptr) break;
        }
        return conflict;
    }

    void var_bump(int v) {
        activity_[v] += var_inc_;
        if (activity_[v] > 1e100) {
            for (int x = 0; x < nvars_; ++x) activity_[x] *= 1e-100;
            var_inc_ *= 1e-100;
        }
        if (heap_pos_[v] >= 0) heap_up(heap_pos_[v]);
    }

    void cla_bump(Clause* c) {
        c->act += cla_inc_;
        if (c->act > 1e20) {
            for (Clause* l : learnts_) l->act *= 1e-20;
            cla_inc_ *= 1e-20;
        }
    }

    // First-UIP learning with local ("basic") minimization.
    void analyze(Clause* conflict, vector<int>& out_learnt, int& out_btlevel) {
        out_learnt.clear();
        out_learnt.push_back(0);  // placeholder for asserting literal
        int path = 0;
        int p = -1;
        int idx = (int)trail_.size() - 1;
        Clause* c = conflict;
        do {
            if (c->learnt) cla_bump(c);
            for (size_t k = (p == -1 ? 0 : 1); k < c->lits.size(); ++k) {
                int q = c->lits[k];
                int v = var_of(q);
                if (!seen_[v] && level_[v] > 0) {
                    seen_[v] = 1;
                    var_bump(v);
                    if (level_[v] >= decision_level())
                        ++path;
                    else
                        out_learnt.push_back(q);
                }
            }
            while (!seen_[var_of(trail_[idx])]) --idx;
            p = trail_[idx];
            c = reason_[var_of(p)];
            seen_[var_of(p)] = 0;
            --path;
            if (c != nullptr && c->lits[0] != p) {
                // reason clause stores the implied literal first
                auto it = std::find(c->lits.begin(), c->lits.end(), p);
                std::iter_swap(c->lits.begin(), it);
            }
        } while (path > 0);
        out_learnt[0] = neg_lit(p);

        // Local minimization: drop literals whose whole reason is marked.
        vector<int> marked = out_learnt;
        for (int l : marked) seen_[var_of(l)] = 1;
        size_t j = 1;
        for (size_t i = 1; i < out_learnt.size(); ++i) {
            int v = var_of(out_learnt[i]);
            Clause* r = reason_[v];
            bool redundant = false;
            if (r != nullptr) {
                redundant = true;
                for (int q : r->lits) {
                    int qv = var_of(q);
                    if (qv == v) continue;
                    if (!seen_[qv] && level_[qv] > 0) {
                        redundant = false;
                        break;
                    }
                }
            }
            if (!redundant) out_learnt[j++] = out_learnt[i];
        }
        out_learnt.resize(j);

        if (out_learnt.size() == 1) {
            out_btlevel = 0;
        } else {
            size_t maxi = 1;
            for (size_t i = 2; i < out_learnt.size(); ++i)
                if (level_[var_of(out_learnt[i])] >
                    level_[var_of(out_learnt[maxi])])
                    maxi = i;
            std::swap(out_learnt[1], out_learnt[maxi]);
            out_btlevel = level_[var_of(out_learnt[1])];
        }
        for (int l : marked) seen_[var_of(l)] = 0;
    }

    // p is a failed assumption literal (value false).  Collect the subset
    // of the assumptions responsible, as external literals.
    void analyze_final(int p) {
        // p is the negation of the failed assumption; report the assumption.
        core_.clear();
        core_.push_back(to_ext(neg_lit(p)));
        if (decision_level() == 0) return;
        seen_[var_of(p)] = 1;
        for (int i = (int)trail_.size() - 1; i >= trail_lim_[0]; --i) {
            int v = var_of(trail_[i]);
            if (!seen_[v]) continue;
            if (reason_[v] == nullptr) {
                core_.push_back(to_ext(trail_[i]));
            } else {
                for (int q : reason_[v]->lits)
                    if (level_[var_of(q)] > 0) seen_[var_of(q)] = 1;
            }
            seen_[v] = 0;
        }
        seen_[var_of(p)] = 0;
    }

    static int to_ext(int lit) {
        int e = var_of(lit) + 1;
        return sign_of(lit) ? -e : e;
    }

    void heap_insert(int v) {
        heap_pos_[v] = (int)heap_.size();
        heap_.push_back(v);
        heap_up(heap_pos_[v]);
    }

    bool heap_lt(int a, int b) const {
        if (activity_[a] != activity_[b]) return activity_[a] > activity_[b];
        return a < b;
    }

    void heap_up(int i) {
        int v = heap_[i];
        while (i > 0) {
            int parent = (i - 1) >> 1;
            if (!heap_lt(v, heap_[parent])) break;
            heap_[i] = heap_[parent];
            heap_pos_[heap_[i]] = i;
            i = parent;
        }
        heap_[i] = v;
        heap_pos_[v] = i;
    }

    void heap_down(int i) {
        int v = heap_[i];
        size_t n = heap_.size();
        while (true) {
            size_t l = 2 * (size_t)i + 1, r = l + 1;
            if (l >= n) break;
            size_t child = (r < n && heap_lt(heap_[r], heap_[l])) ? r : l;
            if (!heap_lt(heap_[child], v)) break;
            heap_[i] = heap_[child];
            heap_pos_[heap_[i]] = i;
            i = (int)child;
        }
        heap_[i] = v;
        heap_pos_[v] = i;
    }

    int heap_pop() {
        int v = heap_[0];
        heap_pos_[v] = -1;
        heap_[0] = heap_.back();
        heap_.pop_back();
        if (!heap_.empty()) {
            heap_pos_[heap_[0]] = 0;
            heap_down(0);
        }
        return v;
    }

    static int64_t luby(int64_t y, int x) {
        int64_t size = 1;
        int seq = 0;
        while (size < x + 1) {
            ++seq;
            size = 2 * size + 1;
        }
        while (size - 1 != x) {
            size = (size - 1) >> 1;
            --seq;
            x = x % (int)size;
        }
        int64_t r = 1;
        for (int i = 0; i < seq; ++i) r *= y;
        return r;
    }

    void reduce_db() {
        // Keep roughly half of the learnts, preferring active clauses;
        // never delete a clause that is a current reason.
        vector<Clause*> sorted = learnts_;
        std::sort(sorted.begin(), sorted.end(), [](Clause* a, Clause* b) {
            if (a->act != b->act) return a->act < b->act;
            return a->id < b->id;
        });
        std::unordered_set<const Clause*> locked;
        for (int v = 0; v < nvars_; ++v)
            if (reason_[v] != nullptr) locked.insert(reason_[v]);
        size_t target = sorted.size() / 2;
        size_t n_doomed = 0;
        for (size_t i = 0; i < sorted.size() && n_doomed < target; ++i) {
            Clause* c = sorted[i];
            if (c->lits.size() > 2 && locked.count(c) == 0) {
                c->doomed = true;
                ++n_doomed;
            }
        }
        if (n_doomed == 0) return;
        for (auto& ws : watches_)
            ws.erase(std::remove_if(
                         ws.begin(), ws.end(),
                         [](const Watcher& w) { return w.c->doomed; }),
                     ws.end());
        learnts_.erase(std::remove_if(learnts_.begin(), learnts_.end(),
                                      [](Clause* c) { return c->doomed; }),
                       learnts_.end());
        owned_.erase(std::remove_if(owned_.begin(), owned_.end(),
                                    [](const std::unique_ptr<Clause>& c) {
                                        return c->doomed;
                                    }),
                     owned_.end());
    }

    int search() {
        vector<int> learnt;
        int64_t restart_limit = 100 * luby(2, restart_seq_);
        int64_t restart_base = conflicts_;
        while (true) {
            Clause* conflict = propagate();
            if (conflict != nullptr) {
                ++conflicts_;
                if (decision_level() == 0) {
                    ok_ = false;
                    core_.clear();
                    return 0;
                }
                int btlevel;
                analyze(conflict, learnt, btlevel);
                cancel_until(btlevel);
                if (learnt.size() == 1) {
                    unchecked_enqueue(learnt[0], nullptr);
                } else {
                    auto cl = std::make_unique<Clause>();
                    cl->lits = learnt;
                    cl->learnt = true;
                    cl->id = next_id_++;
                    cl->act = cla_inc_;
                    Clause* c = cl.get();
                    owned_.push_back(std::move(cl));
                    learnts_.push_back(c);
                    attach(c);
                    unchecked_enqueue(learnt[0], c);
                }
                var_inc_ /= 0.95;
                cla_inc_ /= 0.999;
                if (budget_ >= 0 && conflicts_ >= budget_) return -1;
                if (conflicts_ - restart_base >= restart_limit) {
                    ++restart_seq_;
                    cancel_until(0);
                    restart_limit = 100 * luby(2, restart_seq_);
                    restart_base = conflicts_;
                }
                if ((int64_t)learnts_.size() > 20000 + (int64_t)originals_.size())
                    reduce_db();
            } else {
                // Assumption / decision step.
                int next = -1;
                while (decision_level() < (int)assumptions_.size()) {
                    int p = assumptions_[decision_level()];
                    uint8_t v = value(p);
                    if (v == U_TRUE) {
                        new_decision_level();
                    } else if (v == U_FALSE) {
                        analyze_final(neg_lit(p));
                        return 0;
                    } else {
                        next = p;
                        break;
                    }
                }
                if (next == -1) {
                    while (!heap_.empty() &&
                           assigns_[heap_[0]] != U_UNDEF)
                        heap_pop();
                    if (heap_.empty()) {
                        model_.resize(nvars_);
                        for (int v = 0; v < nvars_; ++v)
                            model_[v] = assigns_[v] == U_TRUE ? (v + 1) : -(v + 1);
                        return 1;
                    }
                    int v = heap_pop();
                    bool pol = user_pol_[v] ? user_pol_[v] == 1
                                            : polarity_[v] != 0;
                    next = 2 * v + (pol ? 0 : 1);
                }
                ++decisions_;
                new_decision_level();
                unchecked_enqueue(next, nullptr);
            }
        }
    }
};

}  // namespace

PYBIND11_MODULE(_cdcl, m) {
    m.doc() = "CDCL satisfiability core with assumption-based core extraction";
    py::class_<Solver>(m, "Solver")
        .def(py::init<>())
        .def("ensure_vars", &Solver::ensure_vars)
        .def("add_clause", &Solver::add_clause)
        .def(
            "solve",
            [](Solver& s, const vector<int>& assumps, int64_t budget) {
                py::gil_scoped_release release;
                return s.solve(assumps, budget);
            },
            py::arg("assumptions"), py::arg("conflict_budget") = -1)
        .def("model", &Solver::model)
        .def("core", &Solver::core)
        .def("set_assumption_pool", &Solver::set_assumption_pool)
        .def(
            "solve_pooled",
            [](Solver& s, const vector<int>& base, py::bytes mask,
               int64_t budget) {
                std::string m = mask;
                py::gil_scoped_release release;
                return s.solve_pooled(base, m, budget);
            },
            py::arg("base"), py::arg("mask"), py::arg("conflict_budget") = -1)
        .def("set_model_filter", &Solver::set_model_filter)
        .def("filtered_model", &Solver::filtered_model)
        .def("reset_learnts", &Solver::reset_learnts)
        .def("set_polarity_hints", &Solver::set_polarity_hints)
        .def_property_readonly("num_vars", &Solver::num_vars)
        .def_property_readonly("conflicts", &Solver::conflicts)
        .def_property_readonly("propagations", &Solver::propagations)
        .def_property_readonly("decisions", &Solver::decisions)
        .def_property_readonly("num_learnts", &Solver::num_learnts)
        .def_property_readonly("num_clauses", &Solver::num_clauses);
}
