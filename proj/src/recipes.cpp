#include <cctype>

#include "kdimer/harness.hpp"

namespace kdimer {

namespace detail {
// Generated from configs/*.yaml at configure time.
extern const Recipe kEmbeddedRecipes[];
extern const std::size_t kEmbeddedRecipeCount;
}  // namespace detail

const std::vector<Recipe>& recipe_catalog() {
  static const std::vector<Recipe> catalog(detail::kEmbeddedRecipes,
                                           detail::kEmbeddedRecipes + detail::kEmbeddedRecipeCount);
  return catalog;
}

namespace {

// "fig2" and "fig02" both map to 2; anything else yields -1.
int figure_number(const std::string& name) {
  if (name.size() < 4 || name.compare(0, 3, "fig") != 0) return -1;
  std::size_t i = 3;
  int n = 0;
  while (i < name.size() && std::isdigit(static_cast<unsigned char>(name[i])))
    n = n * 10 + (name[i++] - '0');
  if (i == 3 || (i < name.size() && name[i] != '_')) return -1;
  return n;
}

}  // namespace

const Recipe* find_recipe(const std::string& name) {
  for (const auto& r : recipe_catalog())
    if (r.name == name) return &r;
  const int fig = figure_number(name);
  if (fig < 0 || name.find('_') != std::string::npos) return nullptr;
  for (const auto& r : recipe_catalog())
    if (figure_number(r.name) == fig) return &r;
  return nullptr;
}

}  // namespace kdimer
