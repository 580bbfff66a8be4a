# fairgap - fairness-surrogate training and verification toolkit
