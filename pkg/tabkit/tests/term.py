import unittest

import numpy as np

from tabkit.exceptions import ContractViolation, TermStructureError
from tabkit.term import (
    Compound,
    Var,
    answer_tokens,
    atom_token,
    canonical_call,
    canonicalize,
    format_term,
    functor_token,
    instantiate,
    int_token,
    is_variant,
    resolve,
    substitution_tokens,
    term_from_tokens,
    term_tokens,
    terms_from_tokens,
    unify,
    unify_all,
    var_token,
)


def p(*args):
    return Compound("p", args)


def random_term(rng, depth=3, n_vars=4):
    kind = rng.integers(4) if depth > 0 else rng.integers(3)
    if kind == 0:
        return int(rng.integers(-50, 50))
    if kind == 1:
        return str(rng.choice(["a", "b", "c"]))
    if kind == 2:
        return Var(int(rng.integers(n_vars)))
    arity = int(rng.integers(0, 4))
    return Compound("f", [random_term(rng, depth - 1, n_vars) for _ in range(arity)])


def rename(term, mapping):
    if type(term) is Var:
        return Var(mapping[term.id])
    if type(term) is Compound:
        return Compound(term.name, [rename(a, mapping) for a in term.args])
    return term


class Test_Canonicalize(unittest.TestCase):
    def test_variables_numbered_by_first_occurrence(self):
        key = canonicalize(p(Var(7), 1, Var(3)))
        expected = (functor_token("p", 3), var_token(0), int_token(1), var_token(1))
        self.assertEqual(key.tokens, expected)
        self.assertEqual(key.predicate, ("p", 3))
        self.assertEqual(key.n_vars, 2)

    def test_variant_calls_share_a_key(self):
        self.assertEqual(canonicalize(p(Var(0), 1, Var(1))), canonicalize(p(Var(5), 1, Var(9))))

    def test_ground_call(self):
        key = canonicalize(Compound("p", ["a", "b"]))
        self.assertEqual(key.tokens, (functor_token("p", 2), atom_token("a"), atom_token("b")))
        self.assertEqual(key.n_vars, 0)

    def test_atom_goal(self):
        key, variables = canonical_call("go")
        self.assertEqual(key.predicate, ("go", 0))
        self.assertEqual(variables, [])

    def test_arity_mismatch(self):
        with self.assertRaises(TermStructureError):
            canonicalize(Compound("p", [1, 2], arity=3))

    def test_not_a_goal(self):
        self.assertRaises(TermStructureError, canonicalize, 3)
        self.assertRaises(TermStructureError, canonicalize, Var(0))

    def test_negative_integers(self):
        for value in (-1, -2, 0, 1, 2, -(2**40)):
            self.assertEqual(term_from_tokens(term_tokens(value)), value)

    def test_bound_variables_are_followed(self):
        x = Var(1 << 40)
        trail = []
        self.assertTrue(unify(x, 3, trail))
        self.assertEqual(canonicalize(p(x, Var(0))), canonicalize(p(3, Var(2))))
        self.assertEqual(trail, [x])

    def test_idempotent_under_renaming(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            term = Compound("g", [random_term(rng) for _ in range(3)])
            mapping = dict(enumerate(rng.permutation(100)[:4].tolist()))
            self.assertEqual(canonicalize(rename(term, mapping)), canonicalize(term))

    def test_instantiate_is_a_variant(self):
        goal = p(Var(0), Compound("f", [Var(1), Var(0)]), "a")
        key = canonicalize(goal)
        copy, variables = instantiate(key)
        self.assertTrue(is_variant(copy, goal))
        self.assertEqual(len(variables), 2)
        self.assertTrue(all(v.id >= 1 << 32 for v in variables))


class Test_Variant(unittest.TestCase):
    def test_variant(self):
        self.assertTrue(is_variant(p(Var(0), 1, Var(1)), p(Var(2), 1, Var(3))))

    def test_reflexive(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            t = random_term(rng)
            self.assertTrue(is_variant(t, t))

    def test_shared_variable_is_not_a_variant(self):
        self.assertFalse(is_variant(p(Var(0), Var(0)), p(Var(0), Var(1))))

    def test_equivalence_classes(self):
        rng = np.random.default_rng(2)
        terms = [random_term(rng, depth=1, n_vars=2) for _ in range(60)]
        for a in terms:
            for b in terms:
                self.assertEqual(is_variant(a, b), is_variant(b, a))
                if is_variant(a, b):
                    for c in terms:
                        if is_variant(b, c):
                            self.assertTrue(is_variant(a, c))

    def test_token_round_trip(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            t = random_term(rng)
            self.assertTrue(is_variant(term_from_tokens(term_tokens(t), fresh=True), t))

    def test_zero_arity_compound(self):
        g = Compound("g", [])
        for t in (g, Compound("f", [g]), Compound("f", [g, "g", Compound("h", [g, Var(0)])])):
            back = term_from_tokens(term_tokens(t))
            self.assertEqual(format_term(back), format_term(t))
            self.assertTrue(is_variant(back, t))
        self.assertFalse(is_variant(Compound("f", [g]), Compound("f", ["g"])))

    def test_zero_arity_call(self):
        self.assertEqual(canonicalize(Compound("go", [])), canonicalize("go"))
        key = canonicalize(Compound("go", []))
        self.assertEqual(key.tokens, (functor_token("go", 0),))
        self.assertEqual(instantiate(key), ("go", []))
        self.assertEqual(answer_tokens(key, "go"), ())
        nested = canonicalize(p(Compound("g", []), Var(0)))
        self.assertEqual(answer_tokens(nested, p(Compound("g", []), 4)), (int_token(4),))
        with self.assertRaises(ContractViolation):
            answer_tokens(nested, p("g", 4))


class Test_AnswerTokens(unittest.TestCase):
    def test_substitution_readout(self):
        key = canonicalize(p(Var(0), 1, Var(1)))
        tokens = answer_tokens(key, p("a", 1, "b"))
        self.assertEqual(tokens, (atom_token("a"), atom_token("b")))

    def test_integers(self):
        key = canonicalize(Compound("path", [Var(0), Var(1)]))
        self.assertEqual(
            answer_tokens(key, Compound("path", [3, 7])), (int_token(3), int_token(7))
        )

    def test_non_ground_answer(self):
        key = canonicalize(p(Var(0)))
        tokens = answer_tokens(key, p(Compound("f", [Var(9)])))
        self.assertEqual(tokens, (functor_token("f", 1), var_token(0)))

    def test_not_an_instance(self):
        key = canonicalize(p(Var(0), 1, Var(1)))
        with self.assertRaises(ContractViolation):
            answer_tokens(key, p("a", 2, "b"))
        with self.assertRaises(ContractViolation):
            answer_tokens(canonicalize(p(Var(0), Var(0))), p(1, 2))


class Test_Unify(unittest.TestCase):
    def test_unify_and_resolve(self):
        x, y = Var(1 << 41), Var((1 << 41) + 1)
        trail = []
        self.assertTrue(unify(p(x, Compound("f", [y])), p(1, Compound("f", ["a"])), trail))
        self.assertEqual(resolve(p(x, y)), p(1, "a"))
        self.assertEqual(len(trail), 2)

    def test_clash(self):
        self.assertFalse(unify(p(1), p(2)))
        self.assertFalse(unify(p(1), Compound("q", [1])))
        self.assertFalse(unify(1, "1"))

    def test_unify_all(self):
        x, y = Var(1 << 42), Var((1 << 42) + 1)
        trail = []
        self.assertTrue(unify_all([x, y, 3], [Compound("g", ["a"]), x, 3], trail))
        self.assertEqual(resolve(y), Compound("g", ["a"]))
        self.assertEqual(trail, [x, y])
        self.assertTrue(unify_all([x], [Compound("g", [Var((1 << 42) + 2)])], trail))
        self.assertFalse(unify_all([y, 4], [Compound("g", ["a"]), "4"], []))
        self.assertFalse(unify_all([1], [True], []))

    def test_unify_all_does_not_bind_a_variable_to_itself(self):
        x, y = Var(1 << 43), Var((1 << 43) + 1)
        trail = []
        self.assertTrue(unify_all([x, y], [y, x], trail))
        self.assertIs(resolve(x), resolve(y))
        self.assertIsNone(resolve(x).binding)
        self.assertEqual(len(trail), 1)


class Test_SubstitutionTokens(unittest.TestCase):
    def test_constants_match_term_tokens(self):
        x = Var(1)
        values = [7, -3, "a", x, Compound("f", [x, "b"]), Compound("g", []), x]
        tokens = substitution_tokens(values)
        self.assertEqual(tokens, term_tokens(Compound("s", values))[1:])

    def test_bound_variables_are_followed(self):
        x, y = Var(1 << 44), Var((1 << 44) + 1)
        x.binding = y
        y.binding = -12
        self.assertEqual(substitution_tokens([x, "c"]), (int_token(-12), atom_token("c")))

    def test_flat_decode(self):
        tokens = (int_token(-4), atom_token("a"), var_token(0), functor_token("g", 0), var_token(0))
        n, a, v, g, w = terms_from_tokens(tokens, 5)
        self.assertEqual((n, a, g), (-4, "a", Compound("g", [])))
        self.assertIs(v, w)
        self.assertGreaterEqual(v.id, 1 << 32)
        self.assertEqual(terms_from_tokens(tokens, 5, fresh=False)[2], Var(0))

    def test_flat_decode_rejects_missing_arguments(self):
        with self.assertRaises(TermStructureError):
            terms_from_tokens((functor_token("f", 2), int_token(1)), 2)


if __name__ == "__main__":
    unittest.main()
