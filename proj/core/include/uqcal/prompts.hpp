// prompts.hpp — prompt templates and slot substitution.
//
// Four built-in templates cover the pipeline's model interactions:
//   answer_generation  — QA prompt producing "R: ... / A: ..." output
//   judge              — yes/no correctness comparison against ground truth
//   uncertainty_cot    — reflect-then-estimate prompt ("Total_uncertainty:")
//   uncertainty_direct — number-only uncertainty prompt
// The same texts ship as files under assets/prompts/; a golden test keeps
// file and built-in copies identical.

#pragma once

#include <map>
#include <string>
#include <vector>

namespace uqcal {

const std::vector<std::string>& prompt_template_ids();

// Raw template text with {slot} placeholders. Throws template-error for an
// unknown id.
const std::string& prompt_template(const std::string& template_id);

// Byte-exact substitution of every {slot} placeholder; template whitespace
// is preserved untouched. Missing slots raise template-error listing their
// names; extra entries in `slots` are ignored.
std::string render_prompt(const std::string& template_id,
                          const std::map<std::string, std::string>& slots);

}  // namespace uqcal
