#pragma once

#include "skillweave/catalog.hpp"
#include "skillweave/skills.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace skillweave {

// Bundled documents, embedded at build time.
std::string_view banking_catalog_text();
std::string_view banking_config_text();

CatalogFile banking_catalog();

// In-process simulated skills addressed as fixture:banking/<name>. Outcomes
// are scripted on the input values and seed, never on call order.
std::shared_ptr<const SkillRuntime> make_fixture_skill(std::string_view locator, std::uint64_t seed);

}  // namespace skillweave
