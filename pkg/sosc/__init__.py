# User value: This package learns motion skills online from streaming demonstrations and replays them as control references.
