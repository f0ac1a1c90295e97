#pragma once

#include "skillweave/compiler.hpp"
#include "skillweave/scenario.hpp"
#include "skillweave/service.hpp"

#include <random>
#include <vector>

namespace skillweave::testing {

struct CatalogLimits {
    int max_elements = 10;
    int max_skills = 8;
    int max_pairs = 4;
    int max_outcomes = 3;
    // Probability that the slot-fill builtin is present.
    double slot_fill_chance = 0.8;
};

// A valid catalog over elements e0..eN with random hierarchy, sensitivity
// and slot-fillability, plus the builtins it needs.
CatalogFile random_catalog(std::mt19937_64& rng, const CatalogLimits& limits = {});

// Random goal, known set and learned facts for a catalog. Costs are all 1.
CompileInput random_compile_input(std::mt19937_64& rng, const CatalogFile& file);

// Planning model built directly from known(eN) fluents, without a catalog.
PlanningModel random_flat_model(std::mt19937_64& rng, int elements, int actions);

// Random utterance drawn from the banking vocabulary, including answers,
// goals, questions, permission replies and noise.
std::string random_banking_utterance(std::mt19937_64& rng);

// Either random utterances or a banking script with steps dropped, noise
// inserted and permission answers flipped.
std::vector<std::string> random_banking_sequence(std::mt19937_64& rng, int max_length = 16);

// Feeds a scenario's events through a fresh in-process session, without
// checking expectations, so tests can inspect the session afterwards.
std::unique_ptr<Session> play_scenario(const Scenario& scenario, Clock clock = system_clock_ms);

std::filesystem::path source_dir();
std::vector<std::filesystem::path> bundled_scenarios();

}  // namespace skillweave::testing
