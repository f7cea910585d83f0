// expect: race
// allow: unknown
// Hand-rolled signalling through a plain flag.
int flag;
int data;
void *producer(void *p) {
  data = 42;
  flag = 1;
  return NULL;
}
int main() {
  create(producer);
  while (flag == 0) {}
  int v = data;
  return 0;
}
