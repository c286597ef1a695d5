"""Domain skins: label sets, scoring items and starter content per field.

Each skin captures the vocabulary one teaching domain uses for the same
underlying game (what the problem is called, what solutions are called,
how asking for help is phrased, what the evidence repository is named)
plus the scoring items that domain cares about.  ``scaffold_workbook``
turns a skin into a compile-clean starter workbook.
"""

from __future__ import annotations

from dataclasses import dataclass, field

ACTION_HEADERS = (
    "id",
    "name",
    "category",
    "initial_state",
    "usefulness",
    "prerequisites",
    "text",
    "media",
    "question",
    "choices",
    "correct",
    "explanation",
    "deltas",
    "trigger",
)

SOLUTION_HEADERS = (
    "slot_id",
    "slot_label",
    "mode",
    "option_id",
    "option_text",
    "correct",
    "allow_free_text",
)

SCORING_HEADERS = ("item_id", "display_name", "direction", "initial", "unit")


@dataclass(frozen=True)
class Skin:
    key: str
    labels: dict[str, str]
    # rows for scoring.csv: (item_id, display_name, direction, initial, unit)
    items: tuple[tuple[str, str, str, str, str], ...]
    meta: dict[str, str]
    problem: str
    solutions: tuple[tuple[str, ...], ...]
    actions: tuple[dict[str, str], ...]
    help: tuple[str, ...] = ()


def _action(**cells: str) -> dict[str, str]:
    row = {h: "" for h in ACTION_HEADERS}
    row.update(cells)
    return row


GENERIC = Skin(
    key="generic",
    labels={},
    items=(("accuracy", "Accuracy", "higher_better", "0", "points"),),
    meta={
        "name": "New case study",
        "created": "2024-01-01",
        "author": "Case author",
        "difficulty": "2",
        "field": "generic",
        "description": "Starter case generated by the scaffold command.",
        "suggestions": "Replace every sample row with your own case content.",
    },
    problem=(
        "Describe here the situation the learners must investigate: who is "
        "involved, what happened, and what they are asked to decide."
    ),
    solutions=(
        ("conclusion", "Conclusion", "single", "good",
         "The well-supported conclusion", "true", "false"),
        ("conclusion", "", "", "weak",
         "A tempting but unsupported conclusion", "false", ""),
    ),
    actions=(
        _action(
            id="gather_facts",
            name="Gather the first facts",
            category="Investigation",
            initial_state="visible",
            usefulness="required",
            text="The obvious first observations are collected.",
            deltas="accuracy:+5",
        ),
        _action(
            id="consult_expert",
            name="Consult an expert",
            category="Investigation",
            initial_state="visible",
            usefulness="optional",
            prerequisites="gather_facts",
            text="The expert points you to the decisive detail.",
            question="What matters most in the expert's report?",
            choices="The decisive detail|A reassuring irrelevance",
            correct="1",
            explanation="The expert's report singles out the decisive detail.",
            deltas="accuracy:+5",
            trigger="on_wrong { add(accuracy, -5) }",
        ),
        _action(
            id="chase_rumor",
            name="Chase a rumor",
            category="Investigation",
            initial_state="visible",
            usefulness="useless",
            text="The rumor leads nowhere.",
        ),
    ),
    help=("Re-read the problem statement before concluding.",),
)


MEDICAL_EMERGENCY = Skin(
    key="medical_emergency",
    labels={
        "problem": "Initial state of admission",
        "solutions": "Pathologies",
        "help": "Call a senior",
        "repository": "Patient file",
    },
    items=(
        ("accuracy", "Accuracy of the medical care", "higher_better", "0", "points"),
        ("time", "Time of the medical care", "lower_better", "0", "seconds"),
    ),
    meta={
        "name": "New emergency case",
        "created": "2024-01-01",
        "author": "Case author",
        "difficulty": "3",
        "field": "medical emergency",
        "description": "Starter emergency case generated by the scaffold command.",
        "suggestions": "Replace every sample row with your own case content.",
    },
    problem=(
        "Describe the patient's state on admission: symptoms, history, "
        "allergies and the first vital signs."
    ),
    solutions=(
        ("pathology", "Pathology", "single", "correct_dx",
         "The correct pathology", "true", "false"),
        ("pathology", "", "", "tempting_dx", "A tempting differential", "false", ""),
    ),
    actions=(
        _action(
            id="stabilize",
            name="Stabilize the patient",
            category="Stabilization actions",
            initial_state="visible",
            usefulness="required",
            text="The patient is stabilized.",
            deltas="accuracy:+5",
        ),
        _action(
            id="examine",
            name="Perform the key examination",
            category="Physical examinations",
            initial_state="visible",
            usefulness="required",
            prerequisites="stabilize",
            text="The examination reveals the decisive sign.",
            question="What does the examination show?",
            choices="The decisive sign|A normal finding",
            correct="1",
            explanation="The decisive sign confirms the diagnosis.",
            deltas="accuracy:+10",
            trigger="on_wrong { add(accuracy, -5) }",
        ),
        _action(
            id="needless_test",
            name="Order a needless test",
            category="Further explorations",
            initial_state="visible",
            usefulness="useless",
            text="The result changes nothing.",
        ),
    ),
    help=("Focus on the vital functions first.",),
)


GENERAL_PRACTITIONER = Skin(
    key="general_practitioner",
    labels={
        "problem": "Patient's requests",
        "solutions": "Pathologies",
        "help": "Help",
        "repository": "Patient file",
    },
    items=(
        ("accuracy", "Accuracy of the medical care and treatment",
         "higher_better", "0", "points"),
        ("time", "Time of the medical care and treatment",
         "lower_better", "0", "seconds"),
        ("cost", "Cost of the medical care and treatment",
         "lower_better", "0", "currency"),
    ),
    meta={
        "name": "New practice case",
        "created": "2024-01-01",
        "author": "Case author",
        "difficulty": "2",
        "field": "general practice",
        "description": "Starter general practice case generated by the scaffold command.",
        "suggestions": "Replace every sample row with your own case content.",
    },
    problem=(
        "Describe what the patient asks for at the start of the consultation "
        "and what they spontaneously report."
    ),
    solutions=(
        ("pathology", "Pathology", "single", "correct_dx",
         "The correct pathology", "true", "false"),
        ("pathology", "", "", "tempting_dx", "A tempting differential", "false", ""),
    ),
    actions=(
        _action(
            id="listen",
            name="Listen to the patient",
            category="Dialogue",
            initial_state="visible",
            usefulness="required",
            text="The patient's account narrows the possibilities.",
            deltas="accuracy:+5",
        ),
        _action(
            id="examine",
            name="Examine the patient",
            category="Physical examinations",
            initial_state="visible",
            usefulness="required",
            prerequisites="listen",
            text="The examination reveals the decisive sign.",
            question="What does the examination show?",
            choices="The decisive sign|A normal finding",
            correct="1",
            explanation="The decisive sign confirms the diagnosis.",
            deltas="accuracy:+10",
            trigger="on_wrong { add(accuracy, -5) }",
        ),
        _action(
            id="extra_analysis",
            name="Order an extra analysis",
            category="Further analysis",
            initial_state="visible",
            usefulness="useless",
            text="The result changes nothing but the bill.",
            deltas="cost:+40",
        ),
    ),
    help=("Let the patient talk before examining.",),
)


LAW = Skin(
    key="law",
    labels={
        "problem": "Problem",
        "solutions": "Legal qualifications",
        "help": "Use a joker",
        "repository": "Client file",
    },
    items=(
        ("reasoning", "Accuracy of the reasoning", "higher_better", "0", "points"),
        ("qualifications", "Choice of legal qualifications",
         "higher_better", "0", "points"),
    ),
    meta={
        "name": "New legal case",
        "created": "2024-01-01",
        "author": "Case author",
        "difficulty": "3",
        "field": "law",
        "description": "Starter legal case generated by the scaffold command.",
        "suggestions": "Replace every sample row with your own case content.",
    },
    problem=(
        "Describe the client's situation and the dispute the learners must "
        "qualify legally."
    ),
    solutions=(
        ("qualification", "Qualification", "single", "correct_q",
         "The correct legal qualification", "true", "false"),
        ("qualification", "", "", "tempting_q",
         "A tempting but wrong qualification", "false", ""),
    ),
    actions=(
        _action(
            id="study_facts",
            name="Study the facts",
            category="Facts",
            initial_state="visible",
            usefulness="required",
            text="The facts of the dispute are established.",
            deltas="reasoning:+5",
        ),
        _action(
            id="study_rules",
            name="Study the rules of law",
            category="Rules of law",
            initial_state="visible",
            usefulness="required",
            prerequisites="study_facts",
            text="The applicable provisions are identified.",
            question="Which provision governs this dispute?",
            choices="The applicable provision|An appealing but inapplicable one",
            correct="1",
            explanation="Only the applicable provision covers these facts.",
            deltas="qualifications:+10",
            trigger="on_wrong { add(qualifications, -5) }",
        ),
        _action(
            id="hearsay",
            name="Collect hearsay",
            category="Facts",
            initial_state="visible",
            usefulness="useless",
            text="Hearsay will not hold in court.",
        ),
    ),
    help=("A joker: start from the duties the parties owe each other.",),
)


MECHANICS = Skin(
    key="mechanics",
    labels={
        "problem": "Machine failure",
        "solutions": "Investigation leads",
        "help": "A helping hand?",
        "repository": "Technical report",
    },
    items=(
        ("accuracy", "Accuracy of the diagnosis", "higher_better", "0", "points"),
        ("cost", "Cost of the investigation", "lower_better", "0", "currency"),
    ),
    meta={
        "name": "New machine failure case",
        "created": "2024-01-01",
        "author": "Case author",
        "difficulty": "3",
        "field": "mechanics",
        "description": "Starter machine failure case generated by the scaffold command.",
        "suggestions": "Replace every sample row with your own case content.",
    },
    problem=(
        "Describe the machine, the failure symptoms and what the breakdown "
        "costs while it lasts."
    ),
    solutions=(
        ("cause", "Failure cause", "single", "correct_cause",
         "The actual failure cause", "true", "false"),
        ("cause", "", "", "tempting_cause",
         "A tempting but wrong cause", "false", ""),
    ),
    actions=(
        _action(
            id="read_docs",
            name="View the documentation",
            category="Documentation",
            initial_state="visible",
            usefulness="required",
            text="The maintenance log shows what should have happened.",
            deltas="accuracy:+5",
        ),
        _action(
            id="strip_down",
            name="Disassemble the suspect part",
            category="Disassembly",
            initial_state="visible",
            usefulness="required",
            prerequisites="read_docs",
            text="The disassembly exposes the decisive wear pattern.",
            question="What does the wear pattern indicate?",
            choices="The actual failure cause|Normal service wear",
            correct="1",
            explanation="The wear pattern matches the actual failure cause.",
            deltas="accuracy:+10|cost:+100",
            trigger="on_wrong { add(accuracy, -5) }",
        ),
        _action(
            id="swap_parts",
            name="Swap parts at random",
            category="Disassembly",
            initial_state="visible",
            usefulness="useless",
            text="The machine still will not run.",
            deltas="cost:+150",
        ),
    ),
    help=("Compare the log's plan with what was actually done.",),
)


SKINS: dict[str, Skin] = {
    skin.key: skin
    for skin in (GENERIC, MEDICAL_EMERGENCY, GENERAL_PRACTITIONER, LAW, MECHANICS)
}
