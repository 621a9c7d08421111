import numpy as np

from ._common import check_width


class HardVoting:
    """Majority vote over already-configured sub-models.

    The default ensemble uses five members, so two-class votes never tie;
    an even split would go to class 1.
    """

    family = "voting"

    def __init__(self, members):
        if not members:
            raise ValueError("voting needs at least one member")
        self.members = list(members)
        self.n_features = None

    def fit(self, X, y):
        for member in self.members:
            member.fit(X, y)
        self.n_features = np.asarray(X).shape[1]
        return self

    def member_predictions(self, X):
        # members may arrive pre-trained; each still checks its own width
        X = check_width(X, self.n_features or self.members[0].n_features)
        return np.stack([m.predict(X) for m in self.members], axis=1)

    def predict(self, X):
        votes = self.member_predictions(X)
        pos = votes.sum(axis=1)
        return (2 * pos >= votes.shape[1]).astype(np.int64)
