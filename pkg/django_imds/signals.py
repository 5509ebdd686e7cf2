from django.dispatch import Signal

system_validated = Signal()
transition_fired = Signal()
state_space_explored = Signal()
