import random

from rauzykit import Substitution, incidence_matrix, is_primitive

LETTERS = "abcdef"


def tribonacci() -> Substitution:
    return Substitution.from_rules(["a", "b", "c"], {"a": "ab", "b": "ac", "c": "a"})


def fibonacci() -> Substitution:
    return Substitution.from_rules(["a", "b"], {"a": "ab", "b": "a"})


def random_substitution(rng: random.Random, k: int | None = None, max_len: int = 3) -> Substitution:
    if k is None:
        k = rng.choice([2, 3])
    letters = list(LETTERS[:k])
    rules = {
        letter: [letters[rng.randrange(k)] for _ in range(rng.randint(1, max_len))]
        for letter in letters
    }
    return Substitution.from_rules(letters, rules)


def random_primitive_substitution(
    rng: random.Random, k: int | None = None, max_len: int = 3
) -> Substitution:
    for _ in range(1000):
        sub = random_substitution(rng, k, max_len)
        if is_primitive(incidence_matrix(sub)):
            return sub
    raise AssertionError("could not sample a primitive substitution")


def shuffled_images_copy(rng: random.Random, sub: Substitution) -> Substitution:
    """Same incidence matrix: each image word is an in-place shuffle of the original."""
    rules = {}
    for letter, image in zip(sub.alphabet, sub.images):
        names = list(image.letters())
        rng.shuffle(names)
        rules[letter] = names
    return Substitution.from_rules(list(sub.alphabet), rules)
