"""Call-type independent vocal identity: learnt and MFCC frontends, shallow
classifiers and the evaluation harness."""

__version__ = "0.1.0"
