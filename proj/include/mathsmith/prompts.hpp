#pragma once

namespace mathsmith::prompts {

// Placeholders in these templates ({seed_question}, {topics}, ...) are
// substituted literally, exactly once each; the inserted text is never
// re-scanned for placeholders.

inline constexpr const char* kConceptExtraction =
    "Act as a Math Teacher and analyze the provided question.\n"
    "Start by identifying 1 or 2 general topics that a student is being assessed on. "
    "Next, highlight 1 to 5 specific knowledge points that the question evaluates.\n"
    "\n"
    "Provided question: {seed_question}\n"
    "\n"
    "Analysis:\n";

inline constexpr const char* kQaGeneration =
    "Act as a Math Teacher and create a new question and its solution based on the "
    "provided topics and knowledge points. Ensure that the created questions:\n"
    "\n"
    "1. Adhere to the provided topics.\n"
    "2. Necessitate the combined use of the associated knowledge points.\n"
    "\n"
    "{few_shot_examples}\n"
    "\n"
    "Topics:\n"
    "{topics}\n"
    "\n"
    "Knowledge Points:\n"
    "{knowledge_points}\n"
    "\n"
    "Structure your response as:\n"
    "Question: <the new question>\n"
    "Solution: <the full solution>\n";

inline constexpr const char* kAlpaca =
    "Below is an instruction that describes a task. "
    "Write a response that appropriately completes the request.\n"
    "\n"
    "### Instruction:\n"
    "{question}\n"
    "\n"
    "### Response:";

inline constexpr const char* kTranslation =
    "I want you to act as a Math Translator. Your task is to translate Chinese math "
    "questions into English math questions.\n"
    "Make sure to keep the original question numbers.\n"
    "Make sure to keep the math formula in Latex format.\n"
    "The translations should be clear, accurate, and easily understandable for students "
    "who are native English speakers.\n"
    "\n"
    "# Chinese Math Questions #:\n"
    "{questions}\n"
    "\n"
    "# English Math Questions #:";

inline constexpr const char* kTextbookQuestions =
    "I want you to act as a Math Parser. Your task is to convert raw messy questions "
    "from a math textbook into well-structured LaTeX-formatted questions.\n"
    "\n"
    "Please ensure to retain the original question numbers.\n"
    "If needed, prepend the original instructions to the parsed questions to make them "
    "more comprehensible.\n"
    "If needed, skip the broken questions.\n"
    "\n"
    "{demo}\n"
    "\n"
    "#Raw Questions#:\n"
    "```\n"
    "{chapter}\n"
    "```\n"
    "\n"
    "#Well-structured LaTeX-formatted Questions#:";

inline constexpr const char* kTextbookAnswers =
    "I want you to act as a Math Parser. Your task is to convert raw messy answers "
    "from a math textbook into well-structured LaTeX-formatted answers.\n"
    "\n"
    "Please ensure to retain the original answer numbers.\n"
    "If needed, skip the broken answers.\n"
    "\n"
    "{demo}\n"
    "\n"
    "#Raw Answers#:\n"
    "```\n"
    "{chapter}\n"
    "```\n"
    "\n"
    "#Well-structured LaTeX-formatted Answers#:";

} // namespace mathsmith::prompts
