import random
import unittest
from unittest.mock import patch

import numpy as np

from tabkit.run import main
from tabkit.utils import set_log_level, setup_seed, thread_rng


class Test_SetupSeed(unittest.TestCase):
    def test_fixes_global_generators(self):
        self.assertTrue(setup_seed(42) is None)
        first = (random.random(), np.random.random())
        setup_seed(42)
        self.assertEqual((random.random(), np.random.random()), first)

    @patch("tabkit.run.setup_seed")
    def test_cli_seed(self, mock_seed):
        argv = ["bench", "--bench", "path-left:cycle:3", "--no-memory", "--seed", "3"]
        self.assertEqual(main(argv), 0)
        mock_seed.assert_called_once_with(3)

    @patch("tabkit.run.setup_seed")
    def test_cli_without_seed(self, mock_seed):
        self.assertEqual(main(["bench", "--bench", "path-left:cycle:3", "--no-memory"]), 0)
        mock_seed.assert_not_called()


class Test_ThreadRng(unittest.TestCase):
    def test_streams(self):
        a = thread_rng(7, 0).integers(1 << 30, size=4)
        self.assertTrue(np.array_equal(a, thread_rng(7, 0).integers(1 << 30, size=4)))
        b = thread_rng(7, 1).integers(1 << 30, size=4)
        self.assertFalse(np.array_equal(a, b))


class Test_LogLevel(unittest.TestCase):
    def test_invalid_level(self):
        with self.assertRaises(ValueError):
            set_log_level("LOUD")


if __name__ == "__main__":
    unittest.main()
