"""
Natural-language prompt for language-model backbones.

The desk backbone does not read text; the builder and its inverse parser keep
the prompt contract available for backbones that do.
"""
import re
from typing import List, Sequence, Tuple

from core.exceptions import EmptyHistoryError

PROMPT_TEMPLATE = (
    "Here is the purchase history of user_{user_id}: item {history}. "
    "I wonder what is the next recommended item for the user. Answer:"
)

_PROMPT_PATTERN = re.compile(
    r"^Here is the purchase history of user_(?P<user>.+?): item (?P<history>.+)\. "
    r"I wonder what is the next recommended item for the user\. Answer:$"
)


def build_prompt(user_id, history: Sequence) -> str:
    """
    Fill the purchase-history prompt.

    Args:
        user_id: User identifier, rendered as ``user_<id>``
        history: Item ids, oldest first

    Raises:
        EmptyHistoryError: If ``history`` is empty
    """
    if len(history) == 0:
        raise EmptyHistoryError("a prompt needs at least one history item")
    rendered = ", ".join(str(item) for item in history)
    return PROMPT_TEMPLATE.format(user_id=user_id, history=rendered)


def parse_prompt(prompt: str) -> Tuple[str, List[str]]:
    """Recover ``(user_id, history)`` from a prompt made by ``build_prompt``."""
    match = _PROMPT_PATTERN.match(prompt)
    if match is None:
        raise ValueError("text does not follow the purchase-history prompt")
    return match.group("user"), match.group("history").split(", ")
