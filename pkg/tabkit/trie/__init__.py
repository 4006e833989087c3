from .levels import DoublingLevel, HashTrieArray
from .trie import INVALID, LEAF, Trie, TrieConfig, TrieNode, TrieStats
