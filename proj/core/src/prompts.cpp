#include "uqcal/prompts.hpp"

#include <sstream>
#include <unordered_map>

#include "uqcal/error.hpp"

namespace uqcal {
namespace {

const std::string kAnswerGeneration =
    R"(Objective
Answer the question below. Think briefly, then give your final answer.
Always provide an answer—if you are unsure or do not know the answer, give your best guess without indicating uncertainty. Your answer has to be short and precise.

Output Format
R: <1-2 sentences of reasoning>
A: <your final answer>

Task
{question}
)";

const std::string kJudge =
    R"(Objective
In this task, you will receive a question. You will also receive a ground truth answer to the question and a model generated answer. Your goal is to compare the ground truth answer and the model generated answer in order to decide whether the model generated answer is correct or not.

Important Rules
1. The model generated answer is correct, when it is a valid answer to the question, and semantically equivalent to the ground truth answer. It does not necessarily need to overlap with the ground truth answer lexically.
2. If the model generated answer contains more information (more specific) or less information (less specific) than the ground truth answer, but still correctly answers the question, then you should consider it correct.
3. If you decide that the model generated answer is correct, say yes, otherwise say no.
4. Your output should only contain your decision (yes or no). It should not contain any other text, explanation or reasoning.

Question: {question}
Ground truth answer: {gold_answer}
Model generated answer: {answer}
)";

const std::string kUncertaintyCot =
    R"(You are an assistant that estimates your total uncertainty about your answer to a question.

I previously asked you to answer the question below, and you provided the answer below.
Now, I want you to reflect on your answer and estimate how uncertain you are about it.

Uncertainty is the probability that your answer would be wrong.
Before giving the final value, briefly reflect on why your answer might be right and why it might be wrong.
Use your current judgment to produce a probability between 0 and 1.

Question: {question}
Answer: {answer}

Output Format
Reflection: <1-2 sentences on why the answer might be right or wrong>
Total_uncertainty: <float between 0 and 1>
)";

const std::string kUncertaintyDirect =
    R"(Given the question and your answer below, estimate your uncertainty about the answer.
Only output the number, no explanations.

Question: {question}
Answer: {answer}

Output Format
Total_uncertainty: <float between 0 and 1>
)";

const std::unordered_map<std::string, const std::string*>& registry() {
  static const std::unordered_map<std::string, const std::string*> map = {
      {"answer_generation", &kAnswerGeneration},
      {"judge", &kJudge},
      {"uncertainty_cot", &kUncertaintyCot},
      {"uncertainty_direct", &kUncertaintyDirect},
  };
  return map;
}

}  // namespace

const std::vector<std::string>& prompt_template_ids() {
  static const std::vector<std::string> ids = {
      "answer_generation", "judge", "uncertainty_cot", "uncertainty_direct"};
  return ids;
}

const std::string& prompt_template(const std::string& template_id) {
  const auto it = registry().find(template_id);
  if (it == registry().end()) {
    raise(errc::template_error, "unknown prompt template: " + template_id);
  }
  return *it->second;
}

std::string render_prompt(const std::string& template_id,
                          const std::map<std::string, std::string>& slots) {
  const std::string& tmpl = prompt_template(template_id);

  std::string out;
  out.reserve(tmpl.size());
  std::vector<std::string> missing;

  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const std::size_t open = tmpl.find('{', pos);
    if (open == std::string::npos) {
      out.append(tmpl, pos, std::string::npos);
      break;
    }
    const std::size_t close = tmpl.find('}', open);
    if (close == std::string::npos) {
      out.append(tmpl, pos, std::string::npos);
      break;
    }
    out.append(tmpl, pos, open - pos);
    const std::string name = tmpl.substr(open + 1, close - open - 1);
    const auto it = slots.find(name);
    if (it == slots.end()) {
      missing.push_back(name);
    } else {
      out.append(it->second);
    }
    pos = close + 1;
  }

  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "template " << template_id << " missing slots:";
    for (const std::string& name : missing) msg << ' ' << name;
    raise(errc::template_error, msg.str());
  }
  return out;
}

}  // namespace uqcal
