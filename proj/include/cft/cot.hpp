#pragma once
// Few-shot baselines: plain k-shot prompting and k-shot chain-of-thought
// prompting built from training pairs. Exemplar chains spell out the relevant
// factual statements, the comparison they feed, and the concluding answer.

#include "cft/eval.hpp"
#include "cft/phrasing.hpp"
#include "cft/split.hpp"

#include <string>
#include <vector>

namespace cft {

enum class PromptMode { Plain, Cot };
std::string to_string(PromptMode m);
PromptMode prompt_mode_from_string(const std::string& s);

struct Exemplar {
    std::string question; // a decision-template prompt for a training pair
    std::string chain;    // facts -> comparison (-> negation reading); empty in plain use
    std::string answer;   // item display name
    std::string pair_key;

    json to_json() const;
    static Exemplar from_json(const json& doc);
};

// Builds k exemplars over distinct training pairs, rotating through the
// registry's decision frames and the domain's preferences so the shot set
// covers the surface variety.
std::vector<Exemplar> build_exemplars(const Domain& domain, const ItemSplit& split,
                                      const PairSet& train_pairs,
                                      const PhrasingRegistry& registry, size_t k,
                                      uint64_t seed);

std::vector<Exemplar> load_exemplars(const std::filesystem::path& path);
void save_exemplars(const std::filesystem::path& path, const std::vector<Exemplar>& exemplars);

// Serializes exemplar blocks; plain mode omits the chains. Zero exemplars
// produce an empty prefix (0-shot). Any exemplar whose pair is not fully
// inside the training split is a fatal leakage error.
std::string build_prompt_prefix(const std::vector<Exemplar>& exemplars, PromptMode mode,
                                const ItemSplit& split);

// Appends each case prompt to the prefix and scores it with the usual
// pairwise rule.
EvalReport evaluate_prompted(Backend& backend, const std::string& prefix,
                             const TestSuite& suite, unsigned concurrency = 1);

} // namespace cft
