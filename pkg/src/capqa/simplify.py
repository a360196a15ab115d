"""Break long caption sentences into short declaratives before question
generation.

Four rewrite rules are applied to a fixpoint, in order:

  R1 coordination_split   (S (S a) (CC and) (S b))  ->  [a.  b.]
  R2 relative_clause      "NP, SBAR(WHNP ...)"      ->  antecedent as subject
  R3 appositive           "NP, NP,"                 ->  copular sentence
  R4 participial          "NP, VP(VBG/VBN ...)" or clause-final ", VBG ..."
                                                    ->  "NP is/are VBG ..."

Sentences matching no rule pass through unchanged (identity).
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import AnnotatedSentence
from .ptb import Node, ParseTree, leaf, interior
from .textnorm import capitalize_first, detokenize

RULE_IDS = {
    "identity": "identity",
    "coordination_split": "R1",
    "relative_clause": "R2",
    "appositive": "R3",
    "participial": "R4",
}

_INTERNAL_PUNCT = {",", ":", ";", "``", "''"}
_MAX_ROUNDS = 50


@dataclass(frozen=True)
class SimpleSentence:
    tree: ParseTree
    source_rule: str  # one of RULE_IDS keys

    @property
    def rule_id(self) -> str:
        return RULE_IDS[self.source_rule]

    @property
    def text(self) -> str:
        words = [n.text for n in self.tree.root.leaves()]
        return capitalize_first(detokenize(words))


def simplify(sentence: AnnotatedSentence) -> list[SimpleSentence]:
    return simplify_tree(sentence.tree())


def simplify_tree(tree: ParseTree) -> list[SimpleSentence]:
    root = tree.root
    if root.label in ("ROOT", "TOP") and len(root.children) == 1:
        root = root.children[0]
    queue: list[tuple[Node, str]] = [(root, "identity")]
    out: list[SimpleSentence] = []
    rounds = 0
    while queue:
        rounds += 1
        node, rule = queue.pop(0)
        products = None
        if rounds <= _MAX_ROUNDS:
            for apply_rule, name in (
                (_split_coordination, "coordination_split"),
                (_extract_relative_clause, "relative_clause"),
                (_extract_appositive, "appositive"),
                (_extract_participial, "participial"),
            ):
                products = apply_rule(node)
                if products is not None:
                    queue.extend((p, name) for p in products)
                    break
        if products is None:
            if rule != "identity":
                node = _finish(node)
            out.append(SimpleSentence(ParseTree(node), rule))
    return out


def subject_copula(np: Node) -> Node:
    """"is" or "are" leaf chosen from the subject's head."""
    if any(c.label == "CC" for c in np.children):
        return leaf("VBP", "are")
    nouns = [n for n in np.leaves() if n.label.startswith("NN") or n.label == "PRP"]
    head = nouns[-1] if nouns else None
    if head is not None and head.label in ("NNS", "NNPS"):
        return leaf("VBP", "are")
    if head is not None and head.label == "PRP" and head.text.lower() in ("they", "we"):
        return leaf("VBP", "are")
    return leaf("VBZ", "is")


def _finish(root: Node) -> Node:
    """Normalize a rule product: drop internal punctuation, end with '.'."""
    _drop_punct(root)
    leaves = root.leaves()
    if not leaves or leaves[-1].label != ".":
        root.children.append(leaf(".", "."))
    return root


def _drop_punct(node: Node) -> None:
    kept = []
    for child in node.children:
        if child.is_leaf and child.label in _INTERNAL_PUNCT:
            continue
        if not child.is_leaf:
            _drop_punct(child)
            if not child.children:
                continue
        kept.append(child)
    node.children = kept


def _first_leaf_label(node: Node) -> str:
    leaves = node.leaves()
    return leaves[0].label if leaves else ""


def _split_coordination(root: Node):
    if root.label != "S":
        return None
    labels = [c.label for c in root.children]
    clause_count = labels.count("S")
    if clause_count < 2 or "CC" not in labels:
        return None
    if any(lab not in ("S", "CC", ",", ":", ";", ".") for lab in labels):
        return None
    return [c.clone() for c in root.children if c.label == "S"]


def _extract_relative_clause(root: Node):
    tree = ParseTree(root)
    for node in tree.nodes():
        if node.is_leaf or node.label != "NP":
            continue
        kids = node.children
        for i in range(len(kids) - 2):
            head, comma, sbar = kids[i], kids[i + 1], kids[i + 2]
            if head.label != "NP" or comma.label != "," or sbar.label != "SBAR":
                continue
            if not sbar.children or sbar.children[0].label not in ("WHNP", "WHPP"):
                continue
            clause = next((c for c in sbar.children if c.label == "S"), None)
            if clause is None:
                continue
            # subject relatives only: the embedded clause starts at its VP
            if not clause.children or clause.children[0].label != "VP":
                continue
            extra = interior("S", head.clone(), *(c.clone() for c in clause.children))
            remove = [comma, sbar]
            if i + 3 < len(kids) and kids[i + 3].label == ",":
                remove.append(kids[i + 3])
            main = _remove_children(root, node, remove)
            return [main, extra]
    return None


def _extract_appositive(root: Node):
    tree = ParseTree(root)
    for node in tree.nodes():
        if node.is_leaf or node.label != "NP":
            continue
        if any(c.label == "CC" for c in node.children):
            continue  # coordination, not apposition
        kids = node.children
        for i in range(len(kids) - 2):
            a, comma, b = kids[i], kids[i + 1], kids[i + 2]
            if a.label != "NP" or comma.label != "," or b.label != "NP":
                continue
            trailing = kids[i + 3] if i + 3 < len(kids) else None
            if trailing is not None and trailing.label != ",":
                continue
            extra = interior(
                "S", a.clone(), interior("VP", subject_copula(a), b.clone())
            )
            remove = [comma, b] + ([trailing] if trailing is not None else [])
            main = _remove_children(root, node, remove)
            return [main, extra]
    return None


def _extract_participial(root: Node):
    tree = ParseTree(root)
    # post-nominal: (NP (NP head) (, ,) (VP (VBG/VBN ...)))
    for node in tree.nodes():
        if node.is_leaf or node.label != "NP":
            continue
        kids = node.children
        for i in range(len(kids) - 2):
            head, comma, part = kids[i], kids[i + 1], kids[i + 2]
            if head.label != "NP" or comma.label != "," or part.label != "VP":
                continue
            if _first_leaf_label(part) not in ("VBG", "VBN"):
                continue
            extra = interior(
                "S", head.clone(), interior("VP", subject_copula(head), part.clone())
            )
            remove = [comma, part]
            if i + 3 < len(kids) and kids[i + 3].label == ",":
                remove.append(kids[i + 3])
            main = _remove_children(root, node, remove)
            return [main, extra]
    # clause-final: ... (, ,) (S (VP (VBG ...))) or (, ,) (VP (VBG ...))
    subject = _main_subject(root)
    if subject is None:
        return None
    for holder in (root, *(c for c in root.children if c.label == "VP")):
        kids = holder.children
        for i in range(len(kids) - 1):
            comma, adjunct = kids[i], kids[i + 1]
            if comma.label != ",":
                continue
            part = adjunct
            if adjunct.label == "S" and len(adjunct.children) == 1:
                part = adjunct.children[0]
            if part.label != "VP" or _first_leaf_label(part) not in ("VBG", "VBN"):
                continue
            extra = interior(
                "S", subject.clone(), interior("VP", subject_copula(subject), part.clone())
            )
            main = _remove_children(root, holder, [comma, adjunct])
            return [main, extra]
    return None


def _main_subject(root: Node):
    if root.label != "S":
        return None
    for i, child in enumerate(root.children):
        if child.label == "NP" and any(
            later.label == "VP" for later in root.children[i + 1 :]
        ):
            return child
    return None


def _remove_children(root: Node, parent: Node, doomed: list[Node]) -> Node:
    """Clone the root with ``doomed`` children of ``parent`` removed."""
    doomed_ids = {id(d) for d in doomed}

    def rebuild(node: Node) -> Node:
        if node.is_leaf:
            return node.clone()
        kept = [
            rebuild(c)
            for c in node.children
            if not (node is parent and id(c) in doomed_ids)
        ]
        return Node(node.label, children=kept)

    return rebuild(root)
