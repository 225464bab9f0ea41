public class App {
    static void process(int[] data) {
        int n = data.length;
        int k = 0;
        while (k < n - 1) {
            boolean swapped = false;
            for (int j = 0; j < n - k - 1; j += 1) {
                if (data[j] > data[j + 1]) {
                    int aux = data[j + 1];
                    data[j + 1] = data[j];
                    data[j] = aux;
                    swapped = true;
                }
            }
            if (!swapped) break;
            k = k + 1;
        }
    }

    public static void main(String[] args) {
        int[] xs = {-21, 76, -41, 69, -21, 42};
        process(xs);
        System.out.printf("%s%n", Arrays.toString(xs));
    }
}
